"""Prime generation and quadratic characters.

A segmented, odd-only sieve of Eratosthenes is the substrate for every
sum over p <= x in this package.  Segments are aligned to absolute
multiples of the segment span, so the segment decomposition of a range
(and hence the chunk order of every downstream reduction) is a pure
function of the range, never of thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import CapacityError, ValidationError

DEFAULT_SEGMENT_SPAN = 1 << 20     # integers per segment; cache-resident odd bitmap
MAX_SIEVE_BOUND = 10**9            # desk scale; raise explicitly if ever needed
MAX_MATERIALIZED_PRIMES = 10**7    # primes_in_range refuses to build larger lists


@dataclass(frozen=True)
class PrimeRange:
    """All primes in [lo, hi], ascending."""

    lo: int
    hi: int
    primes: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return int(self.primes.size)


def _simple_sieve(limit: int) -> np.ndarray:
    """Dense sieve for base primes up to `limit` (used below sqrt(hi))."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


def _sieve_segment(seg_lo: int, seg_hi: int, odd_base: np.ndarray) -> np.ndarray:
    """Primes in [seg_lo, seg_hi), given odd base primes up to sqrt(seg_hi)."""
    out_parts = []
    if seg_lo <= 2 < seg_hi:
        out_parts.append(np.array([2], dtype=np.int64))
    first_odd = max(seg_lo, 3)
    if first_odd % 2 == 0:
        first_odd += 1
    if first_odd >= seg_hi:
        return out_parts[0] if out_parts else np.array([], dtype=np.int64)
    n_odds = (seg_hi - first_odd + 1) // 2
    mask = np.ones(n_odds, dtype=bool)
    for p in odd_base:
        p = int(p)
        if p * p >= seg_hi:
            break
        start = max(p * p, ((seg_lo + p - 1) // p) * p)
        if start % 2 == 0:
            start += p
        if start >= seg_hi:
            continue
        mask[(start - first_odd) // 2 :: p] = False
    odds = first_odd + 2 * np.flatnonzero(mask).astype(np.int64)
    out_parts.append(odds)
    return np.concatenate(out_parts) if len(out_parts) > 1 else out_parts[0]


def iter_prime_segments(
    lo: int,
    hi: int,
    *,
    segment_span: int = DEFAULT_SEGMENT_SPAN,
    threads: int = 1,
    max_bound: int = MAX_SIEVE_BOUND,
) -> Iterator[np.ndarray]:
    """Yield ascending int64 arrays of primes covering [lo, hi], in order.

    Segment boundaries are the absolute multiples of ``segment_span``
    intersected with the range.  With ``threads > 1`` segments are sieved
    concurrently but always yielded in ascending order, so consumers see
    an identical stream for every thread count.
    """
    if lo < 0 or hi < lo:
        raise ValidationError(f"invalid prime range [{lo}, {hi}]")
    if hi > max_bound:
        raise CapacityError(
            f"upper bound {hi} exceeds the configured sieve maximum {max_bound}"
        )
    if hi < 2:
        return
    lo = max(lo, 2)
    base = _simple_sieve(math.isqrt(hi))
    odd_base = base[base > 2]

    first_k = lo // segment_span
    last_k = hi // segment_span
    tasks = []
    for k in range(first_k, last_k + 1):
        seg_lo = max(lo, k * segment_span)
        seg_hi = min(hi + 1, (k + 1) * segment_span)
        if seg_lo < seg_hi:
            tasks.append((seg_lo, seg_hi))

    if threads <= 1:
        for seg_lo, seg_hi in tasks:
            yield _sieve_segment(seg_lo, seg_hi, odd_base)
        return

    # Windowed submission: bounded memory, ascending-order delivery.
    with ThreadPoolExecutor(max_workers=threads) as pool:
        window = threads + 2
        pending = {}
        next_submit = 0
        next_yield = 0
        while next_yield < len(tasks):
            while next_submit < len(tasks) and len(pending) < window:
                a, b = tasks[next_submit]
                pending[next_submit] = pool.submit(_sieve_segment, a, b, odd_base)
                next_submit += 1
            yield pending.pop(next_yield).result()
            next_yield += 1


def iter_primes(lo: int, hi: int, **kwargs) -> Iterator[int]:
    """Stream individual primes in [lo, hi] ascending."""
    for seg in iter_prime_segments(lo, hi, **kwargs):
        yield from seg.tolist()


def primes_in_range(lo: int, hi: int, **kwargs) -> PrimeRange:
    """Materialize all primes in [lo, hi].

    Refuses to build lists above ``MAX_MATERIALIZED_PRIMES`` entries; the
    streaming iterators have no such limit.
    """
    parts = []
    count = 0
    for seg in iter_prime_segments(lo, hi, **kwargs):
        count += seg.size
        if count > MAX_MATERIALIZED_PRIMES:
            raise CapacityError(
                f"range [{lo}, {hi}] holds more than {MAX_MATERIALIZED_PRIMES} primes; "
                "use iter_primes/iter_prime_segments instead"
            )
        parts.append(seg)
    primes = np.concatenate(parts) if parts else np.array([], dtype=np.int64)
    return PrimeRange(lo=lo, hi=hi, primes=primes)


def prime_count(lo: int, hi: int, **kwargs) -> int:
    return sum(int(seg.size) for seg in iter_prime_segments(lo, hi, **kwargs))


def kronecker_symbol(d: int, n: int) -> int:
    """Kronecker symbol (d/n) for n >= 0; completely multiplicative in n."""
    if n < 0:
        raise ValidationError("kronecker_symbol is defined here for n >= 0 only")
    if n == 0:
        return 1 if d in (1, -1) else 0
    if d % 2 == 0 and n % 2 == 0:
        return 0
    result = 1
    # split off the even part of n; (d/2) depends on d mod 8
    twos = 0
    while n % 2 == 0:
        n //= 2
        twos += 1
    if twos % 2 == 1 and d % 8 in (3, 5):
        result = -result
    # Jacobi symbol (d/n) for odd n > 0; depends only on d mod n
    a = d % n
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def _squarefree(n: int) -> bool:
    if n % 4 == 0:
        return False
    f = 2
    while f * f <= n:
        if n % (f * f) == 0:
            return False
        f += 1
    return True


def is_fundamental_discriminant(d: int) -> bool:
    """True for discriminants of quadratic fields (d = 1 excluded)."""
    if d == 0 or d == 1:
        return False
    if d % 4 == 1:
        return _squarefree(abs(d))
    if d % 4 == 0:
        q = d // 4
        return q % 4 in (2, 3) and _squarefree(abs(q))
    return False


def quadratic_character_table(d: int) -> np.ndarray:
    """chi_d(r) for r in [0, |d|); chi_d(n) = table[n mod |d|] by periodicity."""
    if not is_fundamental_discriminant(d):
        raise ValidationError(f"{d} is not a fundamental discriminant")
    q = abs(d)
    return np.array([kronecker_symbol(d, r) for r in range(q)], dtype=np.float64)
