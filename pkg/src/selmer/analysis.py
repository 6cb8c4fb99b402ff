"""Special functions and quadrature for the contour-side checks.

Euler-Maclaurin zeta/Hurwitz evaluation, digamma, the exponential
integrals E1/Ein, the circle-integral identities, and the truncated
vertical-line (Perron) integral.  All main-term formulas elsewhere use
the stored EULER_GAMMA constant; gamma_euler() recomputes the constant
from the two exponential integrals as an independent cross-check.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import AccuracyError, PoleError, ValidationError
from .primes import is_fundamental_discriminant, kronecker_symbol

# 17 significant digits; float(EULER_GAMMA) is the nearest double to gamma.
EULER_GAMMA = 0.57721566490153286

_BERNOULLI_EVEN = [
    Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30),
    Fraction(5, 66), Fraction(-691, 2730), Fraction(7, 6),
    Fraction(-3617, 510), Fraction(43867, 798), Fraction(-174611, 330),
    Fraction(854513, 138), Fraction(-236364091, 2730), Fraction(8553103, 6),
    Fraction(-23749461029, 870), Fraction(8615841276005, 14322),
]

# B_{2j} / (2j)! as floats, j = 1..15
_EM_COEFF = [
    float(b / math.factorial(2 * (j + 1))) for j, b in enumerate(_BERNOULLI_EVEN)
]

_EM_ORDER = 12          # EM correction terms used
_EM_TARGET = 1e-12      # documented remainder target


def _em_remainder_bound(s: complex, n: float, order: int) -> float:
    """Magnitude bound for the first omitted Euler-Maclaurin term."""
    j = order + 1
    poch = 1.0
    for i in range(2 * j - 1):
        poch *= abs(s + i)
    sigma = s.real
    decay = n ** -(sigma + 2 * j - 1)
    scale = abs(s + 2 * j - 1) / (sigma + 2 * j - 1)
    return abs(_EM_COEFF[j - 1]) * poch * decay * scale


def hurwitz_em(s: complex, a: float = 1.0) -> complex:
    """Hurwitz zeta(s, a) for Re s > 0, s != 1, a in (0, 1].

    Euler-Maclaurin with cutoff chosen so the documented remainder bound
    is below 1e-12; absolute error <= 1e-10 on the supported domain.
    """
    s = complex(s)
    if s == 1:
        raise PoleError("zeta has a pole at s = 1")
    if s.real <= 0:
        raise ValidationError("Euler-Maclaurin evaluation requires Re s > 0")
    if abs(s) > 1e3:
        raise ValidationError("|s| > 1e3 outside the supported domain")
    if not 0 < a <= 1:
        raise ValidationError("shift a must lie in (0, 1]")

    n = max(24, int(1.5 * abs(s.imag)) + 8)
    while _em_remainder_bound(s, n + a, _EM_ORDER) > _EM_TARGET and n < 1 << 17:
        n *= 2

    grid = np.arange(n, dtype=np.float64) + a
    terms = grid ** (-s)
    head = complex(math.fsum(terms.real.tolist()), math.fsum(terms.imag.tolist()))

    edge = n + a
    tail = edge ** (1 - s) / (s - 1) + 0.5 * edge ** (-s)
    poch = s
    power = edge ** (-s - 1)
    inv_edge2 = 1.0 / (edge * edge)
    for j in range(1, _EM_ORDER + 1):
        tail += _EM_COEFF[j - 1] * poch * power
        # advance (s)_{2j-1} -> (s)_{2j+1} and the matching power
        poch *= (s + 2 * j - 1) * (s + 2 * j)
        power *= inv_edge2
    return head + tail


def zeta_em(s: complex) -> complex:
    """Riemann zeta for Re s > 0, s != 1 (Euler-Maclaurin)."""
    return hurwitz_em(s, 1.0)


# psi(x) ~ log x - 1/(2x) - sum B_{2j}/(2j x^{2j}); coefficients B_{2j}/(2j)
_DIGAMMA_COEFF = [
    float(b / (2 * (j + 1))) for j, b in enumerate(_BERNOULLI_EVEN[:7])
]


def digamma(x: float) -> float:
    """Digamma for x > 0: upward recurrence to x >= 10, then asymptotics."""
    if x <= 0:
        raise ValidationError("digamma requires x > 0")
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    for c in reversed(_DIGAMMA_COEFF):   # signs live in the coefficients
        series = inv2 * (c + series)
    return acc + math.log(x) - 0.5 / x - series


def dirichlet_L1(d: int) -> float:
    """L(1, chi_d) for a fundamental discriminant d, |d| <= 1e4.

    Finite digamma formula: -(1/|d|) * sum_{a<|d|} chi_d(a) psi(a/|d|).
    """
    if not is_fundamental_discriminant(d):
        raise ValidationError(f"{d} is not a fundamental discriminant")
    if abs(d) > 10**4:
        raise ValidationError("|d| > 1e4 outside the supported domain")
    q = abs(d)
    total = math.fsum(
        kronecker_symbol(d, a) * digamma(a / q)
        for a in range(1, q)
        if kronecker_symbol(d, a) != 0
    )
    return -total / q


def ein(w: float) -> float:
    """Entire exponential integral Ein(w) = int_0^w (1-e^{-u})/u du, w >= 0.

    The alternating series sum_{r>=1} (-1)^{r+1} w^r / (r * r!) converges
    everywhere; above w = 5 it is summed in exact rational arithmetic to
    dodge the cancellation blow-up, then rounded once.
    """
    if w < 0:
        raise ValidationError("ein requires w >= 0")
    if w == 0.0:
        return 0.0
    if w <= 5.0:
        terms = []
        term = w
        r = 1
        while abs(term) > 1e-20:
            terms.append(term / r)
            r += 1
            term *= -w / r
        return math.fsum(terms)
    wf = Fraction(w)
    total = Fraction(0)
    term = wf
    r = 1
    while True:
        total += term / r
        if r > w and abs(float(term)) < 1e-25:
            break
        r += 1
        term *= -wf / r
    return float(total)


def _e1_continued_fraction(y: float) -> float:
    """E1 for y >= 1: e^{-y}/(y+1 - 1/(y+3 - 4/(y+5 - 9/(...)))) via Lentz."""
    tiny = 1e-300
    f = y + 1.0
    c = f
    d = 0.0
    for k in range(1, 500):
        a = -(k * k)
        b = y + 2 * k + 1
        d = b + a * d
        if d == 0.0:
            d = tiny
        c = b + a / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(-y) / f


def exp_integral_E1(y: float) -> float:
    """E1(y) = int_y^inf e^{-u}/u du for y > 0.

    Power series below 1, continued fraction from 1 up; the continued
    fraction at y = 1 keeps gamma_euler() an honest computation rather
    than an algebraic restatement of the stored constant.
    """
    if y <= 0:
        raise ValidationError("exp_integral_E1 requires y > 0")
    if y < 1.0:
        return -EULER_GAMMA - math.log(y) + ein(y)
    return _e1_continued_fraction(y)


def gamma_euler() -> float:
    """Euler's constant recomputed as Ein(1) - E1(1)."""
    return ein(1.0) - _e1_continued_fraction(1.0)


_LEGGAUSS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _leggauss_nodes(order: int):
    if order not in _LEGGAUSS_CACHE:
        _LEGGAUSS_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _LEGGAUSS_CACHE[order]


def _circle_integrals(w: float, order: int) -> tuple[complex, complex]:
    """(int e^{w e^{i theta}} d theta, int theta e^{w e^{i theta}} d theta) on [-pi, pi]."""
    nodes, weights = _leggauss_nodes(order)
    theta = math.pi * nodes
    vals = np.exp(w * np.exp(1j * theta))
    uniform = math.pi * np.sum(weights * vals)
    weighted = math.pi * np.sum(weights * theta * vals)
    return complex(uniform), complex(weighted)


def adaptive_simpson(f, a: float, b: float, tol: float, max_nodes: int = 200000):
    """Adaptive Simpson on [a, b] for real or complex f.

    Returns (value, error_estimate, evaluations); raises AccuracyError
    (carrying the achieved estimate) if the node cap is hit first.
    """
    evals = 0

    def ev(x):
        nonlocal evals
        evals += 1
        return f(x)

    fa, fm, fb = ev(a), ev(0.5 * (a + b)), ev(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    stack = [(a, b, fa, fm, fb, whole, tol)]
    total = 0.0 + 0.0j
    err_total = 0.0
    while stack:
        x0, x1, f0, f12, f1, s, t = stack.pop()
        if evals > max_nodes:
            raise AccuracyError(
                f"adaptive quadrature exceeded {max_nodes} nodes",
                achieved=err_total + abs(s),
            )
        xm = 0.5 * (x0 + x1)
        fl = ev(0.5 * (x0 + xm))
        fr = ev(0.5 * (xm + x1))
        left = (xm - x0) / 6.0 * (f0 + 4.0 * fl + f12)
        right = (x1 - xm) / 6.0 * (f12 + 4.0 * fr + f1)
        delta = left + right - s
        if abs(delta) <= 15.0 * t or (x1 - x0) < 1e-14 * (b - a):
            total += left + right + delta / 15.0
            err_total += abs(delta) / 15.0
        else:
            stack.append((x0, xm, f0, fl, f12, left, t / 2.0))
            stack.append((xm, x1, f12, fr, f1, right, t / 2.0))
    if isinstance(fa, complex) or isinstance(fb, complex):
        return total, err_total, evals
    return total.real, err_total, evals


@dataclass(frozen=True)
class CircleIdentityReport:
    """Numerical check of the three circle-integral identities at one w."""

    w: float
    uniform_integral: complex          # int e^{w e^{i theta}} d theta
    uniform_error: float               # |integral - 2 pi|
    weighted_integral: complex         # int theta e^{w e^{i theta}} d theta
    weighted_reference: complex        # 2 pi i * Ein(w)
    weighted_error: float
    series_integral: float             # quadrature of int_0^w (e^{-u}-1)/u du
    series_reference: float            # -(gamma + log w + E1(w))
    series_error: float
    quad_nodes: int


def circle_identity_report(w: float, quad_tol: float = 1e-10,
                           max_nodes: int = 200000) -> CircleIdentityReport:
    """Evaluate the circle integrals at radius-parameter w and compare.

    (i) the unweighted integral equals 2 pi for every w; (ii) the
    theta-weighted integral equals 2 pi i Ein(w); (iii) the real integral
    int_0^w (e^{-u}-1)/u du equals -(gamma + log w + E1(w)).
    """
    if not 0 < w <= 50:
        raise ValidationError("w must lie in (0, 50]")
    uniform, weighted = _circle_integrals(w, 64)
    uniform_hi, weighted_hi = _circle_integrals(w, 128)
    gl_err = max(abs(uniform - uniform_hi), abs(weighted - weighted_hi))
    if gl_err > max(quad_tol, 1e-12):
        raise AccuracyError(
            "fixed-order circle quadrature did not converge", achieved=gl_err
        )

    def integrand(u: float) -> float:
        if u < 1e-8:
            return -1.0 + u / 2.0 - u * u / 6.0
        return math.expm1(-u) / u

    series_val, _, nodes = adaptive_simpson(integrand, 0.0, w, quad_tol, max_nodes)
    series_ref = -(EULER_GAMMA + math.log(w) + exp_integral_E1(w))
    return CircleIdentityReport(
        w=w,
        uniform_integral=uniform,
        uniform_error=abs(uniform - 2 * math.pi),
        weighted_integral=weighted,
        weighted_reference=2j * math.pi * ein(w),
        weighted_error=abs(weighted - 2j * math.pi * ein(w)),
        series_integral=series_val,
        series_reference=series_ref,
        series_error=abs(series_val - series_ref),
        quad_nodes=nodes,
    )


def unwrap_log_path(values: list[complex]) -> list[complex]:
    """Make the imaginary parts of a log sequence continuous along a path.

    Jumps exceeding pi between consecutive nodes are corrected by the
    nearest multiple of 2 pi.
    """
    out = []
    offset = 0.0
    prev = None
    for v in values:
        im = v.imag + offset
        if prev is not None:
            while im - prev > math.pi:
                im -= 2 * math.pi
                offset -= 2 * math.pi
            while prev - im > math.pi:
                im += 2 * math.pi
                offset += 2 * math.pi
        out.append(complex(v.real, im))
        prev = im
    return out


def log_em_along_path(evaluator, path) -> list[complex]:
    """log evaluator(s) along a path with incremental branch unwrapping."""
    return unwrap_log_path([cmath.log(evaluator(s)) for s in path])


def dirichlet_L_em(s: complex, d: int) -> complex:
    """L(s, chi_d) via |d|^{-s} sum_a chi_d(a) zeta_H(s, a/|d|)."""
    q = abs(d)
    total = 0.0 + 0.0j
    for a in range(1, q + 1):
        chi = kronecker_symbol(d, a)
        if chi != 0:
            total += chi * hurwitz_em(s, a / q)
    return q ** (-complex(s)) * total


@dataclass(frozen=True)
class ContourSpec:
    """Vertical-segment and circle parameters tied to an evaluation point x."""

    x: float
    b: float
    T: float
    b_prime: float
    quad_tol: float = 1e-9
    max_nodes: int = 200000

    def __post_init__(self):
        if self.b <= 0:
            raise ValidationError("b must be positive")
        if self.T < 1:
            raise ValidationError("T must be >= 1")
        if not 0 < self.b_prime < 0.5:
            raise ValidationError("circle radius must lie in (0, 1/2)")
        if not 1e-14 <= self.quad_tol <= 1e-6:
            raise ValidationError("quad_tol must lie in [1e-14, 1e-6]")

    @classmethod
    def from_x(cls, x: float, circle_scale: float = 0.5,
               quad_tol: float = 1e-9, max_nodes: int = 200000) -> "ContourSpec":
        """b = 1/log x, T = e^{sqrt(log x)}, circle radius scale/sqrt(log x)."""
        if x < 2:
            raise ValidationError("x must be >= 2")
        if not 0 < circle_scale < 1:
            raise ValidationError("circle_scale must lie in (0, 1)")
        lx = math.log(x)
        return cls(x=x, b=1.0 / lx, T=math.exp(math.sqrt(lx)),
                   b_prime=circle_scale / math.sqrt(lx),
                   quad_tol=quad_tol, max_nodes=max_nodes)


def _log1p_complex(z: np.ndarray) -> np.ndarray:
    """log(1+z) for complex arrays; numpy's complex log1p is naive near 0."""
    out = np.log(1.0 + z)
    small = np.abs(z) < 1e-4
    if np.any(small):
        zs = z[small]
        # Horner on z - z^2/2 + z^3/3 - z^4/4 + z^5/5 - z^6/6; |error| < |z|^7
        p = np.full_like(zs, -1.0 / 6.0)
        for c in (0.2, -0.25, 1.0 / 3.0, -0.5, 1.0):
            p = p * zs + c
        out[small] = zs * p
    return out


def euler_factor_logs(roots: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Per-prime sum_j -log(1 - alpha_j * w_p) for a (n, k) root block."""
    z = -roots * weights[:, None]
    if np.iscomplexobj(z):
        return -_log1p_complex(z).sum(axis=1)
    return -np.log1p(z).sum(axis=1)


def log_F_on_line(instance, s: complex, prime_cutoff: int, *,
                  rtol: float | None = None, threads: int = 1):
    """Truncated log F(1+s) = sum_{p<=P} sum_j -log(1 - alpha_j p^{-1-s}).

    Returns (value, tail_bound) with tail_bound ~ k P^{-sigma}/(sigma log P).
    Raises AccuracyError when a requested rtol is unreachable at this P.
    """
    from .primes import iter_prime_segments  # local to avoid cycle noise

    s = complex(s)
    sigma = s.real
    if sigma <= 0:
        raise ValidationError("requires Re s > 0")
    tail_bound = instance.degree * prime_cutoff ** (-sigma) / (
        sigma * math.log(prime_cutoff)
    )
    if rtol is not None and tail_bound > rtol:
        raise AccuracyError(
            f"tail bound {tail_bound:.3e} exceeds requested tolerance at P={prime_cutoff}",
            achieved=tail_bound,
        )
    re_parts: list[float] = []
    im_parts: list[float] = []
    for seg in iter_prime_segments(2, prime_cutoff, threads=threads):
        p = seg.astype(np.float64)
        w = np.exp(-(1.0 + s) * np.log(p))
        roots = instance.root_block(seg)
        vals = euler_factor_logs(roots.astype(np.complex128), w)
        re_parts.append(math.fsum(vals.real.tolist()))
        im_parts.append(math.fsum(vals.imag.tolist()))
    return complex(math.fsum(re_parts), math.fsum(im_parts)), tail_bound


@dataclass(frozen=True)
class PerronReport:
    """Truncated vertical-line integral vs. the finite Dirichlet sum."""

    instance: str
    x: float
    b: float
    T: float
    integral: complex
    partial_sum: float
    difference: complex
    abs_gap: float
    quad_nodes: int
    evaluator_check: float   # Euler-product vs. EM evaluator gap at s = b


def perron_truncated(instance, spec: ContourSpec, prime_cutoff: int = 10**6,
                     *, threads: int = 1) -> PerronReport:
    """(1/2 pi i) int_{b-iT}^{b+iT} (x^s/s) log F(1+s) ds vs. sum_{n<=x} b_F(n)/n.

    Supported for instances with an Euler-Maclaurin-grade evaluator of
    F(1+s) (zeta and quadratic Dirichlet); x is capped at 1e4.  The
    Euler-product evaluator at cutoff ``prime_cutoff`` cross-checks the
    EM evaluator at the segment midpoint before integrating.
    """
    from .mertens import dirichlet_partial_sum  # cycle-free at call time

    x, b, T = spec.x, spec.b, spec.T
    if x > 1e4:
        raise ValidationError("perron comparison supported for x <= 1e4")
    kind = getattr(instance, "family", None)
    if kind == "zeta":
        evaluator = lambda s: zeta_em(1 + s)
    elif kind == "dirichlet":
        d = instance.discriminant
        evaluator = lambda s: dirichlet_L_em(1 + s, d)
    else:
        raise ValidationError(
            "perron_truncated needs an Euler-Maclaurin evaluator (zeta or dirichlet)"
        )

    ep_val, ep_tail = log_F_on_line(instance, complex(b, 0.0), prime_cutoff,
                                    threads=threads)
    em_val = cmath.log(evaluator(complex(b, 0.0)))
    evaluator_check = abs(ep_val - em_val)
    if evaluator_check > ep_tail + 1e-8:
        raise AccuracyError(
            "Euler-product and EM evaluators disagree beyond the tail bound",
            achieved=evaluator_check,
        )

    lx = math.log(x)

    def g(t: float) -> complex:
        s = complex(b, t)
        return cmath.exp(s * lx) / s * cmath.log(evaluator(s))

    raw, _, nodes = adaptive_simpson(g, -T, T, spec.quad_tol * 2 * math.pi,
                                     spec.max_nodes)
    integral = raw / (2 * math.pi)
    partial = dirichlet_partial_sum(instance, x, threads=threads)
    diff = integral - partial
    return PerronReport(
        instance=instance.name, x=x, b=b, T=T,
        integral=integral, partial_sum=partial, difference=diff,
        abs_gap=abs(diff), quad_nodes=nodes, evaluator_check=evaluator_check,
    )
