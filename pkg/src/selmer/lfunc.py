"""Euler-product instances: local roots, log-coefficients, pole data.

The four built-in families are the Riemann zeta function, a real
primitive Dirichlet character chi_d, the Dedekind zeta function of the
quadratic field of discriminant d (degree 2, factoring as zeta * L),
and a Rankin-Selberg convolution of two eigenforms (degree 4, built
from normalized Hecke eigenvalue tables).

Coefficient convention for the convolution: b(p^r) is the power sum of
the four local root products divided by r, i.e.
((alpha_f^r + beta_f^r)(alpha_g^r + beta_g^r))/r, not the sum of the
two forms' individual power sums.  At r = 1 this gives
b(p) = lambda_f(p) * lambda_g(p), which is >= 0 when f = g.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable

import gmpy2
import numpy as np

from .errors import (
    CapacityError,
    CoverageError,
    DeligneBoundError,
    FormatError,
    GapError,
    InsufficientDataError,
    ValidationError,
)
from .primes import (
    is_fundamental_discriminant,
    primes_in_range,
    quadratic_character_table,
)

ROOT_BOUND_SLACK = 1e-12
MAX_TAU_LIMIT = 10**6


@dataclass(frozen=True)
class EulerRoots:
    """The k inverse roots of one local Euler factor.

    For instances with non-real roots the tuple is ordered so that
    roots[j] and roots[k-1-j] are complex conjugates; power sums are
    accumulated pairwise in that order, which keeps them exactly real
    in floating point for self-dual data.
    """

    p: int
    roots: tuple[complex, ...]

    def __post_init__(self):
        bound = max((abs(r) for r in self.roots), default=0.0)
        if bound > 1.0 + ROOT_BOUND_SLACK:
            raise ValidationError(
                f"|alpha(p={self.p})| = {bound} exceeds the unit-modulus bound"
            )

    def power_sum(self, r: int) -> complex:
        """sum_j alpha_j^r with conjugate pairs combined first."""
        k = len(self.roots)
        total = 0j
        for j in range(k // 2):
            total += self.roots[j] ** r + self.roots[k - 1 - j] ** r
        if k % 2:
            total += self.roots[k // 2] ** r
        return total


@dataclass(frozen=True)
class LeadingSource:
    """How the leading Laurent coefficient at s = 1 is obtained."""

    kind: str                     # exact | analytic-L1 | config | empirical-fit
    value: float | None = None
    discriminant: int | None = None

    @classmethod
    def exact(cls, value: float) -> "LeadingSource":
        return cls(kind="exact", value=value)

    @classmethod
    def analytic_l1(cls, d: int) -> "LeadingSource":
        return cls(kind="analytic-L1", discriminant=d)

    @classmethod
    def config(cls, value: float) -> "LeadingSource":
        return cls(kind="config", value=value)

    @classmethod
    def empirical_fit(cls) -> "LeadingSource":
        return cls(kind="empirical-fit")


@dataclass(frozen=True)
class LeadingCoefficient:
    value: float
    uncertainty: float
    method: str


@dataclass(frozen=True)
class SelbergInstance:
    """A concrete Euler product: degree, signed pole order, local roots.

    pole_order m follows the signed convention: m > 0 is a pole of order
    m at s = 1, m < 0 a zero of order -m, m = 0 a regular nonzero value.
    """

    name: str
    family: str
    degree: int
    pole_order: int
    leading: LeadingSource
    coverage: float = math.inf    # largest usable prime (inf = unbounded)
    roots_real: bool = True
    discriminant: int | None = None
    _root_block: Callable[[np.ndarray], np.ndarray] = field(repr=False, default=None)
    _b1_block: Callable[[np.ndarray], np.ndarray] | None = field(repr=False, default=None)

    def _check_coverage(self, ps: np.ndarray) -> None:
        if ps.size and int(ps[-1]) > self.coverage:
            raise CoverageError(
                f"{self.name}: prime {int(ps[-1])} beyond coefficient coverage; "
                f"max usable x is {int(self.coverage)}",
                max_x=self.coverage,
            )

    def root_block(self, ps: np.ndarray) -> np.ndarray:
        """(len(ps), degree) array of local roots at the given primes."""
        self._check_coverage(ps)
        return self._root_block(ps)

    def b1_block(self, ps: np.ndarray) -> np.ndarray:
        """b(p) = sum_j alpha_j(p) for an array of primes (real for built-ins)."""
        self._check_coverage(ps)
        if self._b1_block is not None:
            return self._b1_block(ps)
        roots = self._root_block(ps)
        s = roots.sum(axis=1)
        return s.real if self.roots_real else s


def local_roots(instance: SelbergInstance, p: int) -> EulerRoots:
    """Local Euler roots at one prime."""
    block = instance.root_block(np.array([p], dtype=np.int64))
    return EulerRoots(p=p, roots=tuple(complex(v) for v in block[0]))


def b_coeff(instance: SelbergInstance, p: int, r: int) -> complex:
    """b(p^r) = (sum_j alpha_j(p)^r) / r; zero off prime powers by convention."""
    if r < 1:
        raise ValidationError("r must be >= 1")
    return local_roots(instance, p).power_sum(r) / r


def a_coeff(instance: SelbergInstance, p: int, r: int) -> complex:
    """Coefficient of z^r in prod_j (1 - alpha_j z)^{-1} (Newton recurrence)."""
    if r < 0:
        raise ValidationError("r must be >= 0")
    if r > 64:
        raise CapacityError("a_coeff expansion capped at r <= 64")
    roots = local_roots(instance, p)
    h = [1.0 + 0j]
    for t in range(1, r + 1):
        acc = 0j
        for i in range(1, t + 1):
            acc += roots.power_sum(i) * h[t - i]
        h.append(acc / t)
    return h[r]


# ---------------------------------------------------------------------------
# built-in families


def _ones_block(ps: np.ndarray) -> np.ndarray:
    return np.ones((ps.size, 1), dtype=np.float64)


@lru_cache(maxsize=1)
def zeta_instance() -> SelbergInstance:
    """The Riemann zeta function: degree 1, simple pole, leading value 1."""
    return SelbergInstance(
        name="zeta", family="zeta", degree=1, pole_order=1,
        leading=LeadingSource.exact(1.0),
        _root_block=_ones_block,
        _b1_block=lambda ps: np.ones(ps.size, dtype=np.float64),
    )


def _chi_block(d: int):
    table = quadratic_character_table(d)
    q = abs(d)

    def block(ps: np.ndarray) -> np.ndarray:
        return table[ps % q][:, None]

    return block


@lru_cache(maxsize=32)
def dirichlet_instance(d: int) -> SelbergInstance:
    """L(s, chi_d) for a fundamental discriminant d != 1: degree 1, m = 0."""
    if not is_fundamental_discriminant(d):
        raise ValidationError(f"{d} is not a fundamental discriminant")
    block = _chi_block(d)
    return SelbergInstance(
        name=f"dirichlet({d})", family="dirichlet", degree=1, pole_order=0,
        leading=LeadingSource.analytic_l1(d), discriminant=d,
        _root_block=block,
        _b1_block=lambda ps: block(ps)[:, 0],
    )


@lru_cache(maxsize=32)
def dedekind_instance(d: int) -> SelbergInstance:
    """Dedekind zeta of Q(sqrt(d)): degree 2, simple pole, residue L(1, chi_d).

    Local roots are [1, chi_d(p)]; ramified primes carry an exact zero so
    every factor has uniform degree 2.
    """
    if not is_fundamental_discriminant(d):
        raise ValidationError(f"{d} is not a fundamental discriminant")
    chi = _chi_block(d)

    def block(ps: np.ndarray) -> np.ndarray:
        return np.column_stack([np.ones(ps.size, dtype=np.float64), chi(ps)[:, 0]])

    return SelbergInstance(
        name=f"dedekind({d})", family="dedekind", degree=2, pole_order=1,
        leading=LeadingSource.analytic_l1(d), discriminant=d,
        _root_block=block,
        _b1_block=lambda ps: 1.0 + chi(ps)[:, 0],
    )


# ---------------------------------------------------------------------------
# Hecke eigenvalue tables and the Rankin-Selberg convolution


@dataclass(frozen=True)
class CoefficientTable:
    """Normalized Hecke eigenvalues lambda(p) at all primes up to coverage."""

    weight: int
    primes: np.ndarray = field(repr=False)
    lams: np.ndarray = field(repr=False)
    source: str = "table"

    def __post_init__(self):
        if self.weight <= 0 or self.weight % 2 != 0:
            raise ValidationError("weight must be a positive even integer")
        if self.primes.size == 0:
            raise ValidationError("empty coefficient table")
        bad = np.flatnonzero(np.abs(self.lams) > 2.0 + 1e-9)
        if bad.size:
            p = int(self.primes[bad[0]])
            raise DeligneBoundError(
                f"|lambda({p})| = {abs(self.lams[bad[0]])} exceeds 2", p=p
            )

    @property
    def coverage(self) -> int:
        return int(self.primes[-1])

    def lookup(self, ps: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.primes, ps)
        if np.any(idx >= self.primes.size) or np.any(self.primes[idx] != ps):
            raise CoverageError(
                f"prime outside table coverage; max usable x is {self.coverage}",
                max_x=self.coverage,
            )
        return self.lams[idx]


def _bigmul(a: int, b: int) -> int:
    return int(gmpy2.mpz(a) * gmpy2.mpz(b))


def poly_mul_trunc(a: list[int], b: list[int], n: int) -> list[int]:
    """Truncated product of integer polynomials, exactly.

    Kronecker substitution: coefficients are packed into fixed-width limbs
    of one big integer each, multiplied once, and unpacked with balanced
    (signed) limb decoding.  Exact for any signed inputs.
    """
    if not a or not b:
        return [0] * n
    max_a = max(abs(c) for c in a) or 1
    max_b = max(abs(c) for c in b) or 1
    bound = max_a * max_b * min(len(a), len(b))
    bits = bound.bit_length() + 2
    nb = (bits + 7) // 8
    width = 8 * nb
    half = 1 << (width - 1)
    full = 1 << width

    def encode(poly: list[int]) -> int:
        pos = b"".join((c if c > 0 else 0).to_bytes(nb, "little") for c in poly)
        neg = b"".join((-c if c < 0 else 0).to_bytes(nb, "little") for c in poly)
        return int.from_bytes(pos, "little") - int.from_bytes(neg, "little")

    v = _bigmul(encode(a), encode(b))
    n_out = min(n, len(a) + len(b) - 1)
    buf = v.to_bytes(nb * (len(a) + len(b) + 2), "little", signed=True)
    out = [0] * n
    carry = 0
    for i in range(n_out):
        raw = int.from_bytes(buf[i * nb : (i + 1) * nb], "little") + carry
        if raw >= half:
            out[i] = raw - full
            carry = 1
        else:
            out[i] = raw
            carry = 0
    return out


def _pentagonal_series(n: int) -> list[int]:
    """Coefficients of prod_{m>=1} (1 - q^m) up to degree n-1."""
    coeffs = [0] * n
    coeffs[0] = 1
    k = 1
    while True:
        g1 = k * (3 * k - 1) // 2
        g2 = k * (3 * k + 1) // 2
        if g1 >= n and g2 >= n:
            break
        sign = -1 if k % 2 else 1
        if g1 < n:
            coeffs[g1] = sign
        if g2 < n:
            coeffs[g2] = sign
        k += 1
    return coeffs


def tau_table(limit: int) -> list[int]:
    """Ramanujan tau(n) for 1 <= n <= limit, exact integers.

    Expands prod (1 - q^m) by the pentagonal-number theorem and raises it
    to the 24th power by repeated truncated multiplication (squaring
    chain 2, 4, 8, 16, 24).  Entry [0] is a placeholder zero.
    """
    if limit < 1:
        raise ValidationError("limit must be >= 1")
    if limit > MAX_TAU_LIMIT:
        raise CapacityError(f"tau table capped at {MAX_TAU_LIMIT}")
    n = limit  # need coefficients of E^24 up to degree limit-1
    e1 = _pentagonal_series(n)
    e2 = poly_mul_trunc(e1, e1, n)
    e4 = poly_mul_trunc(e2, e2, n)
    e8 = poly_mul_trunc(e4, e4, n)
    e16 = poly_mul_trunc(e8, e8, n)
    e24 = poly_mul_trunc(e16, e8, n)
    return [0] + e24[:limit]


@lru_cache(maxsize=4)
def tau_coefficient_table(limit: int) -> CoefficientTable:
    """Normalized weight-12 eigenvalues lambda(p) = tau(p)/p^{11/2}, p <= limit."""
    taus = tau_table(limit)
    ps = primes_in_range(2, limit).primes
    lams = np.array([float(taus[int(p)]) / float(p) ** 5.5 for p in ps])
    return CoefficientTable(weight=12, primes=ps, lams=lams, source="tau")


def load_coefficients(path: str | Path, weight: int) -> CoefficientTable:
    """Read a `p,lambda` (or raw `p,a_raw`) coefficient file.

    One header line, then ascending `prime,value` rows; `#` starts a
    comment.  Raw integer coefficients are normalized by p^{(weight-1)/2}.
    Validates primality, ascending order, the |lambda| <= 2 bound, and
    gap-freeness below the last listed prime.
    """
    path = Path(path)
    rows: list[tuple[int, float]] = []
    raw_mode: bool | None = None
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if raw_mode is None:
                header = text.replace(" ", "")
                if header == "p,lambda":
                    raw_mode = False
                elif header == "p,a_raw":
                    raw_mode = True
                else:
                    raise FormatError(
                        "header must be 'p,lambda' or 'p,a_raw'", line=lineno
                    )
                continue
            parts = text.split(",")
            if len(parts) != 2:
                raise FormatError("expected 'prime,value'", line=lineno)
            try:
                p = int(parts[0])
                val = float(parts[1])
            except ValueError as exc:
                raise FormatError(str(exc), line=lineno) from None
            if p < 2 or any(p % f == 0 for f in range(2, math.isqrt(p) + 1)):
                raise FormatError(f"{p} is not prime", line=lineno)
            if rows and p <= rows[-1][0]:
                raise FormatError(f"primes not strictly ascending at {p}", line=lineno)
            if raw_mode:
                val = val / float(p) ** ((weight - 1) / 2.0)
            if abs(val) > 2.0 + 1e-9:
                raise DeligneBoundError(
                    f"|lambda({p})| = {abs(val)} exceeds the bound 2", p=p
                )
            rows.append((p, val))
    if raw_mode is None or not rows:
        raise FormatError("no coefficient rows found", line=1)
    ps = np.array([r[0] for r in rows], dtype=np.int64)
    expected = primes_in_range(2, int(ps[-1])).primes
    if ps.size != expected.size or not np.array_equal(ps, expected):
        missing = sorted(set(expected.tolist()) - set(ps.tolist()))
        raise GapError(
            f"missing prime {missing[0]} below the coverage bound {int(ps[-1])}"
        )
    lams = np.array([r[1] for r in rows], dtype=np.float64)
    return CoefficientTable(weight=weight, primes=ps, lams=lams, source=str(path))


def _half_roots(lams: np.ndarray) -> np.ndarray:
    """Stable unit-circle branch alpha = lam/2 + i sqrt(1 - lam^2/4)."""
    h = lams / 2.0
    return h + 1j * np.sqrt(np.maximum(0.0, 1.0 - h * h))


def rankin_instance(table_f: CoefficientTable,
                    table_g: CoefficientTable | None = None,
                    name: str | None = None,
                    leading: LeadingSource | None = None) -> SelbergInstance:
    """Degree-4 convolution of two eigenforms (same form when g omitted).

    Local roots are the four products of the forms' unit-circle root
    pairs, ordered so conjugates sit symmetrically.  Simple pole (m = 1)
    when f = g, regular point (m = 0) otherwise.
    """
    same = table_g is None or table_g is table_f
    g = table_f if same else table_g
    if g.weight != table_f.weight:
        raise ValidationError("both forms must share one weight")
    coverage = min(table_f.coverage, g.coverage)
    m = 1 if same else 0
    if leading is None:
        leading = LeadingSource.empirical_fit()

    def block(ps: np.ndarray) -> np.ndarray:
        af = _half_roots(table_f.lookup(ps))
        ag = _half_roots(g.lookup(ps))
        return np.column_stack([
            af * ag,
            af * np.conj(ag),
            np.conj(af) * ag,
            np.conj(af) * np.conj(ag),
        ])

    def b1(ps: np.ndarray) -> np.ndarray:
        return table_f.lookup(ps) * g.lookup(ps)

    if name is None:
        name = "rankin(f,f)" if same else "rankin(f,g)"
    return SelbergInstance(
        name=name, family="rankin", degree=4, pole_order=m,
        leading=leading, coverage=coverage, roots_real=False,
        _root_block=block, _b1_block=b1,
    )


def rankin_tau_instance(limit: int = 10**5) -> SelbergInstance:
    """Built-in convolution of the weight-12 cusp form with itself."""
    table = tau_coefficient_table(limit)
    return rankin_instance(table, name="rankin(tau,tau)")


def leading_coefficient(instance: SelbergInstance,
                        samples=None) -> LeadingCoefficient:
    """The leading Laurent coefficient c at s = 1 (lim (s-1)^m F(s)).

    empirical-fit sources need `samples`: a sequence of at least four
    (x, log partial-Euler-product at 1) pairs; the fitted value is the
    limit of exp(log F_x(1) - m*gamma - m*log log x), with the spread of
    the last few estimates reported as the uncertainty.
    """
    src = instance.leading
    if src.kind == "exact" or src.kind == "config":
        return LeadingCoefficient(value=src.value, uncertainty=0.0, method=src.kind)
    if src.kind == "analytic-L1":
        from .analysis import dirichlet_L1

        return LeadingCoefficient(
            value=dirichlet_L1(src.discriminant), uncertainty=1e-10,
            method="analytic-L1",
        )
    if src.kind == "empirical-fit":
        from .analysis import EULER_GAMMA

        if samples is None or len(samples) < 4:
            raise InsufficientDataError(
                "empirical leading-coefficient fit needs >= 4 sample points"
            )
        pts = sorted((float(x), float(v)) for x, v in samples)
        m = instance.pole_order
        ests = [
            math.exp(v - m * EULER_GAMMA - m * math.log(math.log(x)))
            for x, v in pts
        ]
        window = ests[-4:]
        return LeadingCoefficient(
            value=ests[-1],
            uncertainty=max(window) - min(window),
            method="empirical-fit",
        )
    raise ValidationError(f"unknown leading source {src.kind!r}")
