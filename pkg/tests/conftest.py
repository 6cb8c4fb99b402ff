import numpy as np
import pytest

from selmer import lfunc


@pytest.fixture(scope="session")
def zeta():
    return lfunc.zeta_instance()


@pytest.fixture(scope="session")
def chi4():
    return lfunc.dirichlet_instance(-4)


@pytest.fixture(scope="session")
def dedekind4():
    return lfunc.dedekind_instance(-4)


@pytest.fixture(scope="session")
def rankin_small():
    """Convolution backed by the tau table up to 1e3 (fast)."""
    return lfunc.rankin_instance(
        lfunc.tau_coefficient_table(1000), name="rankin(tau,tau)"
    )


@pytest.fixture(scope="session")
def rankin_1e5():
    """Convolution at full acceptance coverage (built once per session)."""
    return lfunc.rankin_tau_instance(10**5)


@pytest.fixture(scope="session")
def trial_division_primes():
    """Independent prime oracle: trial division up to 1e5."""

    def is_prime(n: int) -> bool:
        if n < 2:
            return False
        f = 2
        while f * f <= n:
            if n % f == 0:
                return False
            f += 1
        return True

    return np.array([n for n in range(2, 10**5 + 1) if is_prime(n)], dtype=np.int64)
