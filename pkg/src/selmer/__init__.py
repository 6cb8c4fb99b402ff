"""selmer: Mertens-type theorems and a prime number theorem, numerically,
for concrete Euler products in the extended Selberg class."""

from .analysis import (
    EULER_GAMMA,
    ContourSpec,
    circle_identity_report,
    digamma,
    dirichlet_L1,
    ein,
    exp_integral_E1,
    gamma_euler,
    hurwitz_em,
    log_F_on_line,
    perron_truncated,
    zeta_em,
)
from .lfunc import (
    CoefficientTable,
    EulerRoots,
    LeadingSource,
    SelbergInstance,
    a_coeff,
    b_coeff,
    dedekind_instance,
    dirichlet_instance,
    leading_coefficient,
    load_coefficients,
    local_roots,
    rankin_instance,
    rankin_tau_instance,
    tau_coefficient_table,
    tau_table,
    zeta_instance,
)
from .mertens import (
    DecayFit,
    M1Constant,
    MertensConstant,
    MertensReport,
    dirichlet_partial_sum,
    empirical_leading_samples,
    fit_decay,
    log_partial_euler,
    mertens1_report,
    mertens2_report,
    mertens3_report,
    mertens_constant_M,
    mertens_constant_M1,
    mertens_constant_M_limit,
    pnt_report,
)
from .primes import (
    PrimeRange,
    is_fundamental_discriminant,
    iter_prime_segments,
    iter_primes,
    kronecker_symbol,
    prime_count,
    primes_in_range,
)

__version__ = "0.1.0"
