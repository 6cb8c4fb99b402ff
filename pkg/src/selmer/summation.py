"""Deterministic compensated reduction over chunked prime sums.

Every long sum in this package is reduced the same way: each chunk (one
sieve segment) is summed exactly with ``math.fsum``, and the per-chunk
totals are combined in ascending chunk order with Neumaier compensation.
Chunk boundaries are fixed by the sieve segmentation, so results are
bit-identical regardless of thread count or scheduling.
"""

from __future__ import annotations

import math

import numpy as np


class Neumaier:
    """Kahan-Babuska compensated accumulator for scalar additions."""

    __slots__ = ("_sum", "_comp")

    def __init__(self) -> None:
        self._sum = 0.0
        self._comp = 0.0

    def add(self, value: float) -> None:
        t = self._sum + value
        if abs(self._sum) >= abs(value):
            self._comp += (self._sum - t) + value
        else:
            self._comp += (value - t) + self._sum
        self._sum = t

    @property
    def value(self) -> float:
        return self._sum + self._comp


def chunk_total(arr: np.ndarray) -> float:
    """Exactly rounded sum of one chunk (empty chunks contribute 0)."""
    if arr.size == 0:
        return 0.0
    return math.fsum(arr.tolist())


class ComplexAccumulator:
    """Ordered chunk reduction of a possibly-complex stream.

    Real and imaginary parts are carried separately so self-dual data
    reports its imaginary residue instead of silently discarding it.
    """

    __slots__ = ("_re", "_im")

    def __init__(self) -> None:
        self._re = Neumaier()
        self._im = Neumaier()

    def add_array(self, arr: np.ndarray) -> None:
        if np.iscomplexobj(arr):
            self._re.add(chunk_total(arr.real))
            self._im.add(chunk_total(arr.imag))
        else:
            self._re.add(chunk_total(arr))

    @property
    def real(self) -> float:
        return self._re.value

    @property
    def imag(self) -> float:
        return self._im.value
