import math

import numpy as np
import pytest

from selmer import analysis, lfunc, mertens
from selmer.errors import InsufficientDataError, ValidationError
from selmer.primes import iter_primes, primes_in_range

GAMMA = analysis.EULER_GAMMA


# --- oracles ---------------------------------------------------------------


def von_mangoldt_sum(x: int) -> float:
    """Brute-force sum of Lambda(n) for n <= x via factorization."""
    total = []
    for n in range(2, x + 1):
        m, p = n, None
        f = 2
        while f * f <= m:
            if m % f == 0:
                p = f
                while m % f == 0:
                    m //= f
                break
            f += 1
        if p is None:
            total.append(math.log(n))       # n itself prime
        elif m == 1:
            total.append(math.log(p))       # proper prime power
    return math.fsum(total)


def prime_power_b_sum(instance, x: float) -> float:
    """Independent enumeration of sum b(p^r)/p^r over prime powers <= x."""
    terms = []
    for p in iter_primes(2, int(x)):
        pk, r = p, 1
        while pk <= x:
            terms.append(lfunc.b_coeff(instance, p, r).real / pk)
            pk *= p
            r += 1
    return math.fsum(terms)


# --- log partial Euler product and partial sums ----------------------------


def test_log_partial_euler_at_two(zeta):
    value, imag = mertens.log_partial_euler(zeta, 2)
    assert value == pytest.approx(math.log(2), abs=0)
    assert imag == 0.0


def test_log_partial_euler_small_brute(zeta):
    expect = -sum(math.log1p(-1.0 / p) for p in (2, 3, 5, 7))
    value, _ = mertens.log_partial_euler(zeta, 10)
    assert abs(value - expect) < 1e-14


def test_log_partial_euler_dirichlet(chi4):
    expect = -math.log(1 + 1 / 3) - math.log(1 - 1 / 5) - math.log(1 + 1 / 7)
    value, _ = mertens.log_partial_euler(chi4, 10)
    assert abs(value - expect) < 1e-14


def test_dirichlet_partial_sum_examples(zeta, dedekind4, chi4):
    expect = 1 / 2 + 1 / 3 + (1 / 2) / 4 + 1 / 5 + 1 / 7 + (1 / 3) / 8 + (1 / 2) / 9
    assert mertens.dirichlet_partial_sum(zeta, 10) == pytest.approx(expect, abs=1e-15)
    assert mertens.dirichlet_partial_sum(zeta, 2) == 0.5
    lhs = mertens.dirichlet_partial_sum(dedekind4, 10)
    rhs = (mertens.dirichlet_partial_sum(zeta, 10)
           + mertens.dirichlet_partial_sum(chi4, 10))
    assert abs(lhs - rhs) < 1e-14


@pytest.mark.parametrize("x", [50, 500, 5000])
def test_dirichlet_partial_sum_against_enumeration(zeta, chi4, x):
    for inst in (zeta, chi4):
        got = mertens.dirichlet_partial_sum(inst, x)
        assert abs(got - prime_power_b_sum(inst, x)) < 1e-12


def test_truncation_tail_envelope(zeta, chi4, dedekind4, rankin_1e5):
    for inst in (zeta, chi4, dedekind4, rankin_1e5):
        for x in (1e2, 1e3, 1e4, 1e5):
            lp = mertens.log_partial_euler(inst, x)[0]
            dp = mertens.dirichlet_partial_sum(inst, x)
            assert abs(lp - dp) <= 5 * inst.degree / math.sqrt(x), (inst.name, x)


# --- Mertens 3rd -----------------------------------------------------------


def test_mertens3_exp_log_consistency(zeta, chi4):
    for inst, x in ((zeta, 1e4), (chi4, 1e4)):
        rep = mertens.mertens3_report(inst, x)
        lp, _ = mertens.log_partial_euler(inst, x)
        assert rep.value == pytest.approx(math.exp(lp), rel=1e-12)


def test_mertens3_zeta_small_report_shape(zeta):
    rep = mertens.mertens3_report(zeta, 2)
    assert rep.value == 2.0
    assert rep.main_term == pytest.approx(math.exp(GAMMA) * math.log(2), rel=1e-15)
    assert rep.kind == "mertens3"
    assert rep.residual == rep.value - rep.main_term
    assert rep.constant_used == 0.0      # log of leading coefficient 1
    assert rep.elapsed_seconds >= 0.0


def test_mertens3_zeta_1e6_against_product_oracle(zeta):
    ps = primes_in_range(2, 10**6).primes.astype(np.float64)
    oracle = float(np.prod(1.0 / (1.0 - 1.0 / ps)))
    rep = mertens.mertens3_report(zeta, 10**6)
    assert rep.value == pytest.approx(oracle, rel=1e-10)
    assert abs(rep.rel_residual) <= 2e-3


def test_mertens3_dirichlet_converges_to_L1(chi4):
    ps = primes_in_range(2, 10**6).primes.astype(np.float64)
    chi = np.array([1.0 if p % 4 == 1 else -1.0 for p in ps])
    chi[ps == 2] = 0.0
    oracle = float(np.prod(1.0 / (1.0 - chi / ps)))
    rep = mertens.mertens3_report(chi4, 10**6)
    assert rep.value == pytest.approx(oracle, rel=1e-10)
    assert abs(rep.value - math.pi / 4) <= 1e-2


# --- Mertens 2nd and the constant M ----------------------------------------


def test_mertens2_small(zeta):
    rep = mertens.mertens2_report(zeta, 2, M=0.0)
    assert rep.value == 0.5


def test_mertens2_zeta_1e6_residual(zeta):
    M = mertens.mertens_constant_M(zeta, 10**6)
    rep = mertens.mertens2_report(zeta, 10**6, M=M.value)
    assert abs(rep.residual) <= 1e-3


def test_mertens2_reciprocal_sum_oracle(zeta):
    ps = primes_in_range(2, 10**4).primes.astype(np.float64)
    oracle = math.fsum((1.0 / ps).tolist())
    rep = mertens.mertens2_report(zeta, 10**4, M=0.0)
    assert rep.value == pytest.approx(oracle, abs=1e-13)


def test_mertens2_dedekind_additivity(zeta, chi4, dedekind4):
    x = 10**5
    lhs = mertens.mertens2_report(dedekind4, x, M=0.0).value
    rhs = (mertens.mertens2_report(zeta, x, M=0.0).value
           + mertens.mertens2_report(chi4, x, M=0.0).value)
    assert abs(lhs - rhs) <= 1e-12


def test_constant_M_formula_vs_limit_estimator(zeta):
    formula = mertens.mertens_constant_M(zeta, 10**6)
    limit = mertens.mertens_constant_M_limit(zeta, 10**6)
    assert formula.tail_bound == 2e-6
    assert abs(formula.value - limit) <= 5e-4


def test_constant_M_zeta_classical_decomposition(zeta):
    # gamma + sum_p [log(1 - 1/p) + 1/p], truncated at the same cutoff
    ps = primes_in_range(2, 10**6).primes.astype(np.float64)
    classical = GAMMA + math.fsum((np.log1p(-1.0 / ps) + 1.0 / ps).tolist())
    formula = mertens.mertens_constant_M(zeta, 10**6).value
    assert abs(formula - classical) <= 1e-6


def test_constant_M_dirichlet_direct_double_sum(chi4):
    # truncated double sum oracle, r-series cut far below double precision
    terms = []
    for p in iter_primes(2, 2 * 10**4):
        chi = 0 if p == 2 else (1 if p % 4 == 1 else -1)
        for r in range(2, 60):
            t = (chi ** r) / (r * float(p) ** r)
            if abs(t) < 1e-22:
                break
            terms.append(t)
    oracle = math.log(analysis.dirichlet_L1(-4)) - math.fsum(terms)
    got = mertens.mertens_constant_M(chi4, 2 * 10**4).value
    assert abs(got - oracle) <= 1e-9


def test_constant_M_requires_min_cutoff(zeta):
    with pytest.raises(ValidationError):
        mertens.mertens_constant_M(zeta, 500)


# --- Mertens 1st and the constant M1 ----------------------------------------


def test_mertens1_small(zeta):
    rep = mertens.mertens1_report(zeta, 2, M1=0.0)
    assert rep.value == pytest.approx(math.log(2) / 2, abs=0)


def test_mertens1_log_weighted_oracle(zeta):
    ps = primes_in_range(2, 10**4).primes.astype(np.float64)
    oracle = math.fsum((np.log(ps) / ps).tolist())
    rep = mertens.mertens1_report(zeta, 10**4, M1=0.0)
    assert rep.value == pytest.approx(oracle, abs=1e-12)


def test_m1_piecewise_integral_against_quadrature_oracle(zeta):
    """Composite-Simpson quadrature of the step-residual integral on [2, U]."""
    U = 10**4
    M = mertens.mertens_constant_M(zeta, 10**6).value
    ps = primes_in_range(2, U).primes.tolist()
    knots = ps + [U]
    s = 0.0
    pieces = []
    panels = 8
    for left, right in zip(knots[:-1], knots[1:]):
        s += 1.0 / left
        if right == left:
            continue
        f = lambda u, s=s: (s - math.log(math.log(u)) - M) / u
        xs = np.linspace(left, right, 2 * panels + 1)
        ys = np.array([f(u) for u in xs])
        h = (right - left) / (2 * panels)
        pieces.append(h / 3 * (ys[0] + ys[-1] + 4 * ys[1:-1:2].sum()
                               + 2 * ys[2:-2:2].sum()))
    integral_oracle = math.fsum(pieces)
    got = mertens.mertens_constant_M1(zeta, U, M=M)
    reconstructed = (
        -integral_oracle + M * math.log(2.0)
        + math.log(2.0) * (math.log(math.log(2.0)) - 1.0)
    )
    assert abs(got.value - reconstructed) <= 1e-6


def test_m1_estimators_agree(zeta):
    M = mertens.mertens_constant_M(zeta, 10**6).value
    res = mertens.mertens_constant_M1(zeta, 10**6, M=M)
    assert res.gap <= 2e-3
    assert not res.inconsistent
    assert abs(res.value - (-1.3326)) <= 1.5e-3
    assert abs(res.limit_estimate - (-1.3326)) <= 1.5e-3
    assert res.tail_uncertainty >= 0.0


def test_m1_dirichlet_two_estimators(chi4):
    M = mertens.mertens_constant_M(chi4, 10**6).value
    res = mertens.mertens_constant_M1(chi4, 10**6, M=M)
    assert res.gap <= 1e-2          # m = 0: both estimate lim sum chi(p) log p / p
    assert not res.inconsistent


def test_m1_inconsistency_warning_carried(zeta):
    res = mertens.mertens_constant_M1(zeta, 10**4, M=0.7)  # deliberately wrong M
    assert res.inconsistent
    assert res.gap > 1e-2


def test_m1_requires_min_U(zeta):
    with pytest.raises(ValidationError):
        mertens.mertens_constant_M1(zeta, 100.0, M=0.0)


# --- PNT --------------------------------------------------------------------


@pytest.mark.parametrize("x", [10, 100, 1000, 10000])
def test_pnt_zeta_equals_von_mangoldt(zeta, x):
    rep = mertens.pnt_report(zeta, x)
    assert abs(rep.value - von_mangoldt_sum(x)) <= 1e-9
    assert rep.prime_term is not None and rep.prime_power_term is not None
    assert rep.value == pytest.approx(rep.prime_term + rep.prime_power_term, abs=0)


def test_pnt_dirichlet_small_mean(chi4):
    rep = mertens.pnt_report(chi4, 10**6)
    assert abs(rep.value / 10**6) <= 1e-2
    assert rep.main_term == 0.0
    assert math.isnan(rep.rel_residual)


def test_pnt_dedekind_additivity(zeta, chi4, dedekind4):
    x = 10**5
    lhs = mertens.pnt_report(dedekind4, x).value
    rhs = mertens.pnt_report(zeta, x).value + mertens.pnt_report(chi4, x).value
    assert abs(lhs - rhs) <= 1e-10 * abs(lhs)


# --- decay fits -------------------------------------------------------------


def test_fit_decay_exact_model_recovery():
    pts = [(10.0**k, math.exp(-0.7 * math.sqrt(math.log(10.0**k))))
           for k in range(2, 9)]
    fit = mertens.fit_decay(pts)
    assert abs(fit.C_estimate - 0.7) <= 1e-6
    assert fit.rms_misfit <= 1e-12


def test_fit_decay_constant_residuals():
    pts = [(10.0**k, 0.25) for k in range(2, 7)]
    fit = mertens.fit_decay(pts)
    assert abs(fit.C_estimate) <= 1e-9


def test_fit_decay_drops_tiny_and_counts():
    pts = [(10.0**k, math.exp(-0.5 * math.sqrt(math.log(10.0**k))))
           for k in range(2, 8)]
    pts.append((1e9, 0.0))
    fit = mertens.fit_decay(pts)
    assert fit.n_dropped == 1
    assert abs(fit.C_estimate - 0.5) <= 1e-6


def test_fit_decay_insufficient_points():
    with pytest.raises(InsufficientDataError):
        mertens.fit_decay([(1e2, 0.1), (1e3, 0.05), (1e4, 0.0)])


def test_fit_decay_duplicate_x_rejected():
    pts = [(1e2, 0.1), (1e2, 0.2), (1e3, 0.05), (1e4, 0.02)]
    with pytest.raises(ValidationError):
        mertens.fit_decay(pts)


def test_zeta_pnt_residual_decay_positive(zeta):
    pts = []
    for x in (1e4, 1e5, 1e6, 1e7):
        rep = mertens.pnt_report(zeta, x)
        pts.append((x, rep.rel_residual))
    fit = mertens.fit_decay(pts)
    assert fit.C_estimate > 0


# --- determinism ------------------------------------------------------------


def test_reports_bit_identical_across_threads(zeta, chi4):
    for inst in (zeta, chi4):
        a = mertens.mertens2_report(inst, 10**6, M=0.0, threads=1)
        b = mertens.mertens2_report(inst, 10**6, M=0.0, threads=4)
        assert a.value == b.value
        p1 = mertens.pnt_report(inst, 10**5, threads=1)
        p4 = mertens.pnt_report(inst, 10**5, threads=4)
        assert p1.value == p4.value
        l1 = mertens.log_partial_euler(inst, 10**5, threads=1)
        l3 = mertens.log_partial_euler(inst, 10**5, threads=3)
        assert l1 == l3


def test_repeated_run_bit_identical(zeta):
    a = mertens.mertens3_report(zeta, 10**5).value
    b = mertens.mertens3_report(zeta, 10**5).value
    assert a == b


def test_imag_residue_bounded_for_self_dual(rankin_1e5):
    value, imag = mertens.log_partial_euler(rankin_1e5, 10**5)
    assert imag <= 1e-9
    rep = mertens.pnt_report(rankin_1e5, 10**4)
    assert rep.imag_residue <= 1e-9


def test_empirical_leading_samples_shape(rankin_small):
    samples = mertens.empirical_leading_samples(rankin_small, [100, 300, 600, 900])
    assert len(samples) == 4
    assert all(isinstance(v, float) for _, v in samples)
    lead = lfunc.leading_coefficient(rankin_small, samples)
    assert lead.value > 0
