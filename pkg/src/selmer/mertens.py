"""Partial Euler products, the three Mertens-type sums, and the
Chebyshev-type sum, with their constants and residual decay fits.

Every sum over p <= x streams through the segmented sieve; per-segment
contributions are summed exactly and segments are reduced in ascending
order (see summation.py), so all report values are bit-identical across
repeated runs and thread counts.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .analysis import EULER_GAMMA, euler_factor_logs
from .errors import InsufficientDataError, ValidationError
from .lfunc import SelbergInstance, leading_coefficient, local_roots
from .primes import iter_prime_segments
from .summation import ComplexAccumulator, Neumaier, chunk_total

_DEFAULT_CONSTANT_CUTOFF = 10**6


@dataclass(frozen=True)
class MertensReport:
    """One (instance, x) evaluation of a Mertens-type quantity."""

    instance: str
    x: float
    kind: str                 # mertens1 | mertens2 | mertens3 | pnt
    value: float
    main_term: float
    constant_used: float      # M, M1, or log c as applicable (0 for pnt)
    residual: float           # value - main_term, exactly as stored
    imag_residue: float
    elapsed_seconds: float
    prime_term: float | None = None        # pnt only: sum over primes
    prime_power_term: float | None = None  # pnt only: r >= 2 part

    @property
    def rel_residual(self) -> float:
        if self.main_term == 0.0:
            return math.nan
        return self.residual / self.main_term


@dataclass(frozen=True)
class DecayFit:
    """Least-squares fit of log|residual| against sqrt(log x)."""

    points: tuple[tuple[float, float], ...]
    C_estimate: float
    intercept: float
    rms_misfit: float
    n_dropped: int = 0


@dataclass(frozen=True)
class MertensConstant:
    """Generalized second-Mertens constant with its truncation tail bound."""

    value: float
    tail_bound: float
    cutoff: int


@dataclass(frozen=True)
class M1Constant:
    """First-Mertens constant: piecewise-exact integral and limit estimator.

    `value` comes from the exact step-function integral on [2, U]; the
    tail beyond U is only *reported* (estimated from the fitted decay
    envelope), never added.  `inconsistent` flags an estimator gap above
    1e-2; it is a warning, not a failure.
    """

    value: float
    tail_uncertainty: float
    limit_estimate: float
    gap: float
    inconsistent: bool
    U: float
    x_max: float
    decay: DecayFit | None


def _resolve_leading(instance: SelbergInstance, leading: float | None,
                     samples=None) -> float:
    if leading is not None:
        return float(leading)
    return leading_coefficient(instance, samples=samples).value


def log_partial_euler(instance: SelbergInstance, x: float, *,
                      threads: int = 1) -> tuple[float, float]:
    """log of the partial Euler product at 1 over p <= x.

    The inner series over prime powers is summed in closed form per
    prime as sum_j -log(1 - alpha_j(p)/p).  Returns (real part,
    |imaginary residue|).
    """
    if x < 2:
        raise ValidationError("x must be >= 2")
    acc = ComplexAccumulator()
    for seg in iter_prime_segments(2, int(x), threads=threads):
        roots = instance.root_block(seg)
        acc.add_array(euler_factor_logs(roots, 1.0 / seg.astype(np.float64)))
    return acc.real, abs(acc.imag)


def _prime_power_terms(instance: SelbergInstance, x: float, weight):
    """sum over p^r <= x, r >= 2 of weight(b(p^r), p, r); scalar loop."""
    total_re: list[float] = []
    total_im: list[float] = []
    sqrt_x = math.isqrt(int(x))
    if sqrt_x < 2:
        return 0.0, 0.0
    for seg in iter_prime_segments(2, sqrt_x):
        for p in seg.tolist():
            roots = local_roots(instance, p)
            pk = p * p
            r = 2
            while pk <= x:
                b = roots.power_sum(r) / r
                term = weight(b, p, r, pk)
                total_re.append(term.real)
                total_im.append(term.imag)
                pk *= p
                r += 1
    return math.fsum(total_re), math.fsum(total_im)


def dirichlet_partial_sum(instance: SelbergInstance, x: float, *,
                          threads: int = 1) -> float:
    """sum over prime powers p^r <= x of b(p^r)/p^r."""
    if x < 2:
        raise ValidationError("x must be >= 2")
    acc = ComplexAccumulator()
    for seg in iter_prime_segments(2, int(x), threads=threads):
        p = seg.astype(np.float64)
        acc.add_array(instance.b1_block(seg) / p)
    re, _ = _prime_power_terms(instance, x, lambda b, p, r, pk: b / pk)
    return acc.real + re


def mertens3_report(instance: SelbergInstance, x: float, *,
                    leading: float | None = None, samples=None,
                    threads: int = 1) -> MertensReport:
    """Partial Euler product vs. c * e^{gamma m} (log x)^m."""
    t0 = time.perf_counter()
    c = _resolve_leading(instance, leading, samples)
    log_value, imag = log_partial_euler(instance, x, threads=threads)
    value = math.exp(log_value)
    m = instance.pole_order
    main = c * math.exp(EULER_GAMMA * m) * math.log(x) ** m
    return MertensReport(
        instance=instance.name, x=float(x), kind="mertens3",
        value=value, main_term=main, constant_used=math.log(c),
        residual=value - main, imag_residue=imag,
        elapsed_seconds=time.perf_counter() - t0,
    )


def mertens_constant_M(instance: SelbergInstance, cutoff: int, *,
                       leading: float | None = None, samples=None,
                       threads: int = 1) -> MertensConstant:
    """Generalized Mertens constant log c + m gamma - sum_p sum_{r>=2} b(p^r)/p^r.

    The double sum is truncated at p <= cutoff; the documented tail bound
    2k/cutoff follows from |b(p^r)| <= k/r and geometric tails.
    """
    if cutoff < 10**3:
        raise ValidationError("cutoff must be >= 1e3")
    c = _resolve_leading(instance, leading, samples)
    acc = ComplexAccumulator()
    for seg in iter_prime_segments(2, cutoff, threads=threads):
        p = seg.astype(np.float64)
        logs = euler_factor_logs(instance.root_block(seg), 1.0 / p)
        acc.add_array(logs - instance.b1_block(seg) / p)
    m = instance.pole_order
    value = math.log(c) + m * EULER_GAMMA - acc.real
    return MertensConstant(
        value=value, tail_bound=2.0 * instance.degree / cutoff, cutoff=cutoff
    )


def mertens_constant_M_limit(instance: SelbergInstance, x: float, *,
                             threads: int = 1) -> float:
    """Limit estimator of the second-Mertens constant:
    sum_{p<=x} b(p)/p - m log log x."""
    acc = ComplexAccumulator()
    for seg in iter_prime_segments(2, int(x), threads=threads):
        acc.add_array(instance.b1_block(seg) / seg.astype(np.float64))
    return acc.real - instance.pole_order * math.log(math.log(x))


def mertens2_report(instance: SelbergInstance, x: float, *,
                    M: float | None = None, cutoff: int | None = None,
                    leading: float | None = None, samples=None,
                    threads: int = 1) -> MertensReport:
    """sum_{p<=x} b(p)/p vs. m log log x + M.

    When M is not supplied it is computed at a moderate default cutoff
    (at most 1e6); pass an explicit constant for full-scale runs.
    """
    t0 = time.perf_counter()
    if M is None:
        P = cutoff or int(min(max(x, 1e4), _DEFAULT_CONSTANT_CUTOFF))
        M = mertens_constant_M(instance, P, leading=leading, samples=samples,
                               threads=threads).value
    acc = ComplexAccumulator()
    for seg in iter_prime_segments(2, int(x), threads=threads):
        acc.add_array(instance.b1_block(seg) / seg.astype(np.float64))
    m = instance.pole_order
    main = m * math.log(math.log(x)) + M
    return MertensReport(
        instance=instance.name, x=float(x), kind="mertens2",
        value=acc.real, main_term=main, constant_used=M,
        residual=acc.real - main, imag_residue=abs(acc.imag),
        elapsed_seconds=time.perf_counter() - t0,
    )


def _loglog_antiderivative(u: float) -> float:
    """Antiderivative of log log u / u, i.e. (log u)(log log u - 1)."""
    lu = math.log(u)
    return lu * (math.log(lu) - 1.0)


def mertens_constant_M1(instance: SelbergInstance, U: float, *,
                        M: float | None = None, x_max: float | None = None,
                        cutoff: int | None = None,
                        leading: float | None = None, samples=None,
                        threads: int = 1, checkpoints: int = 14) -> M1Constant:
    """First-Mertens constant via the exact residual integral on [2, U].

    The second-Mertens residual is a step function jumping only at
    primes, so the integral of residual(u)/u is evaluated piecewise in
    closed form.  A second (limit) estimator sum_{p<=x_max} b(p) log p/p
    - m log x_max is computed in the same pass; both values and their
    gap are reported.
    """
    if U < 1e4:
        raise ValidationError("U must be >= 1e4")
    x_max = float(x_max if x_max is not None else U)
    if M is None:
        P = cutoff or int(min(max(U, 1e4), _DEFAULT_CONSTANT_CUTOFF))
        M = mertens_constant_M(instance, P, leading=leading, samples=samples,
                               threads=threads).value
    m = instance.pole_order
    bound = int(max(U, x_max))

    cps = np.logspace(2.0, math.log10(U), checkpoints)
    cps = cps[cps <= U]
    cp_vals: list[tuple[float, float]] = []
    cp_next = 0

    step_integral = Neumaier()   # sum of S_i * (L_{i+1} - L_i) over [2, U]
    limit_sum = Neumaier()       # sum b(p) log p / p over p <= x_max
    s_carry = 0.0
    log_prev = None
    for seg in iter_prime_segments(2, bound, threads=threads):
        pf = seg.astype(np.float64)
        b1 = instance.b1_block(seg)
        if np.iscomplexobj(b1):
            b1 = b1.real
        logs = np.log(pf)

        in_x = seg <= x_max
        if np.any(in_x):
            limit_sum.add(chunk_total(b1[in_x] * logs[in_x] / pf[in_x]))

        in_u = seg <= U
        if not np.any(in_u):
            continue
        c = b1[in_u] / pf[in_u]
        lu = logs[in_u]
        cum = s_carry + np.cumsum(c)
        if log_prev is not None:
            step_integral.add(s_carry * (lu[0] - log_prev))
        if lu.size > 1:
            step_integral.add(chunk_total(cum[:-1] * np.diff(lu)))
        while cp_next < cps.size and cps[cp_next] <= seg[in_u][-1]:
            ck = float(cps[cp_next])
            idx = int(np.searchsorted(seg[in_u], ck, side="right"))
            s_at = float(cum[idx - 1]) if idx > 0 else s_carry
            delta = s_at - m * math.log(math.log(ck)) - M
            cp_vals.append((ck, delta))
            cp_next += 1
        s_carry += chunk_total(c)
        log_prev = float(lu[-1])

    if log_prev is None:
        raise ValidationError("no primes below U")
    step_integral.add(s_carry * (math.log(U) - log_prev))

    integral_2_U = (
        step_integral.value
        - M * (math.log(U) - math.log(2.0))
        - m * (_loglog_antiderivative(U) - _loglog_antiderivative(2.0))
    )
    value = (
        -integral_2_U
        + M * math.log(2.0)
        + m * math.log(2.0) * (math.log(math.log(2.0)) - 1.0)
    )

    decay = None
    tail = abs(cp_vals[-1][1]) * 2.0 * math.sqrt(math.log(U)) if cp_vals else 0.0
    try:
        decay = fit_decay(cp_vals)
        C = max(decay.C_estimate, 0.05)
        v0 = math.sqrt(math.log(U))
        tail = math.exp(decay.intercept) * 2.0 * (v0 / C + 1.0 / C**2) * math.exp(-C * v0)
    except InsufficientDataError:
        pass

    limit_estimate = limit_sum.value - m * math.log(x_max)
    gap = abs(value - limit_estimate)
    return M1Constant(
        value=float(value), tail_uncertainty=float(tail),
        limit_estimate=float(limit_estimate), gap=float(gap),
        inconsistent=gap > 1e-2, U=float(U), x_max=x_max, decay=decay,
    )


def mertens1_report(instance: SelbergInstance, x: float, *,
                    M1: float | None = None, M: float | None = None,
                    leading: float | None = None, samples=None,
                    threads: int = 1) -> MertensReport:
    """sum_{p<=x} b(p) log p / p vs. m log x + M1."""
    t0 = time.perf_counter()
    if M1 is None:
        U = min(max(x, 1e4), float(_DEFAULT_CONSTANT_CUTOFF))
        M1 = mertens_constant_M1(instance, U, M=M, leading=leading,
                                 samples=samples, threads=threads).value
    acc = ComplexAccumulator()
    for seg in iter_prime_segments(2, int(x), threads=threads):
        p = seg.astype(np.float64)
        acc.add_array(instance.b1_block(seg) * np.log(p) / p)
    m = instance.pole_order
    main = m * math.log(x) + M1
    return MertensReport(
        instance=instance.name, x=float(x), kind="mertens1",
        value=acc.real, main_term=main, constant_used=M1,
        residual=acc.real - main, imag_residue=abs(acc.imag),
        elapsed_seconds=time.perf_counter() - t0,
    )


def pnt_report(instance: SelbergInstance, x: float, *,
               threads: int = 1) -> MertensReport:
    """sum_{n<=x} b(n) log n vs. m x, with the two addends reported.

    The n = p part is sum b(p) log p; the prime-power part adds
    b(p^r) * r log p over p^r <= x, r >= 2.
    """
    t0 = time.perf_counter()
    if x < 2:
        raise ValidationError("x must be >= 2")
    acc = ComplexAccumulator()
    for seg in iter_prime_segments(2, int(x), threads=threads):
        p = seg.astype(np.float64)
        acc.add_array(instance.b1_block(seg) * np.log(p))
    pw_re, pw_im = _prime_power_terms(
        instance, x, lambda b, p, r, pk: b * r * math.log(p)
    )
    m = instance.pole_order
    value = acc.real + pw_re
    main = m * float(x)
    return MertensReport(
        instance=instance.name, x=float(x), kind="pnt",
        value=value, main_term=main, constant_used=0.0,
        residual=value - main, imag_residue=abs(acc.imag) + abs(pw_im),
        elapsed_seconds=time.perf_counter() - t0,
        prime_term=acc.real, prime_power_term=pw_re,
    )


def fit_decay(points) -> DecayFit:
    """Fit |residual| ~ exp(intercept - C sqrt(log x)) by least squares.

    Points with |residual| < 1e-300 are dropped (and counted); fewer
    than four usable points is an error.
    """
    usable = [(float(x), float(r)) for x, r in points if abs(r) >= 1e-300]
    dropped = len(list(points)) - len(usable)
    if len(usable) < 4:
        raise InsufficientDataError(
            f"decay fit needs >= 4 usable points, got {len(usable)}"
        )
    xs = np.array([p[0] for p in usable])
    if np.unique(xs).size != xs.size:
        raise ValidationError("x values must be distinct")
    t = np.sqrt(np.log(xs))
    y = np.log(np.abs(np.array([p[1] for p in usable])))
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    return DecayFit(
        points=tuple(usable), C_estimate=float(-slope),
        intercept=float(intercept),
        rms_misfit=float(np.sqrt(np.mean(resid**2))),
        n_dropped=dropped,
    )


def empirical_leading_samples(instance: SelbergInstance, xs, *,
                              threads: int = 1) -> list[tuple[float, float]]:
    """(x, log partial Euler product) pairs for leading-coefficient fits."""
    return [
        (float(x), log_partial_euler(instance, x, threads=threads)[0])
        for x in xs
    ]
