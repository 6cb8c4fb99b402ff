import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selmer import primes
from selmer.errors import CapacityError, ValidationError


def test_small_range():
    assert primes.primes_in_range(2, 10).primes.tolist() == [2, 3, 5, 7]


def test_empty_below_two():
    assert primes.primes_in_range(0, 1).primes.tolist() == []


def test_count_to_1e4(trial_division_primes):
    oracle = int((trial_division_primes <= 10**4).sum())
    assert primes.prime_count(1, 10**4) == oracle == 1229


def test_exact_agreement_with_trial_division(trial_division_primes):
    ours = primes.primes_in_range(2, 10**5).primes
    assert np.array_equal(ours, trial_division_primes)


def test_range_lower_bound_respected():
    got = primes.primes_in_range(10**4, 10**4 + 200).primes.tolist()
    assert got[0] >= 10**4
    assert got == [10007, 10009, 10037, 10039, 10061, 10067, 10069, 10079,
                   10091, 10093, 10099, 10103, 10111, 10133, 10139, 10141,
                   10151, 10159, 10163, 10169, 10177, 10181, 10193]


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=2, max_value=20000))
def test_segmentation_invariance(m):
    n = 20001
    left = primes.primes_in_range(2, m).primes
    right = primes.primes_in_range(m + 1, n).primes
    whole = primes.primes_in_range(2, n).primes
    assert np.array_equal(np.concatenate([left, right]), whole)


def test_segment_span_invariance():
    a = primes.primes_in_range(2, 10**5).primes
    b = primes.primes_in_range(2, 10**5, segment_span=1 << 12).primes
    assert np.array_equal(a, b)


def test_threaded_stream_identical():
    serial = list(primes.iter_prime_segments(2, 5 * 10**6))
    threaded = list(primes.iter_prime_segments(2, 5 * 10**6, threads=4))
    assert len(serial) == len(threaded)
    for a, b in zip(serial, threaded):
        assert np.array_equal(a, b)


def test_capacity_error_names_limit():
    with pytest.raises(CapacityError, match=str(primes.MAX_SIEVE_BOUND)):
        primes.prime_count(2, primes.MAX_SIEVE_BOUND + 1)


def test_materialization_guard(monkeypatch):
    monkeypatch.setattr(primes, "MAX_MATERIALIZED_PRIMES", 10)
    with pytest.raises(CapacityError, match="iter_primes"):
        primes.primes_in_range(2, 1000)


def test_iter_primes_streams():
    assert list(primes.iter_primes(2, 30)) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


# --- Kronecker symbol ---------------------------------------------------


@pytest.mark.parametrize("d,n,expected", [
    (-4, 5, 1),
    (-4, 2, 0),
    (-4, 3, -1),
    (5, 5, 0),
    (1, 0, 1),
    (-1, 0, 1),
    (8, 0, 0),
    (12, 35, 1),
])
def test_kronecker_values(d, n, expected):
    assert primes.kronecker_symbol(d, n) == expected


def test_kronecker_matches_legendre(trial_division_primes):
    # Legendre oracle via Euler's criterion at odd primes
    for p in trial_division_primes[1:50]:
        p = int(p)
        for d in (-4, 5, -3, 13, -7):
            e = pow(d % p, (p - 1) // 2, p)
            legendre = 0 if d % p == 0 else (1 if e == 1 else -1)
            assert primes.kronecker_symbol(d, p) == legendre, (d, p)


def test_kronecker_multiplicative():
    rng = np.random.default_rng(42)
    for d in (-4, 5, -8, 12, -20):
        a = rng.integers(0, 10**6, size=2000)
        b = rng.integers(0, 10**6, size=2000)
        for x, y in zip(a.tolist(), b.tolist()):
            lhs = primes.kronecker_symbol(d, x * y)
            rhs = primes.kronecker_symbol(d, x) * primes.kronecker_symbol(d, y)
            assert lhs == rhs


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([-4, -3, 5, 8, -8, 12, -20, 21]),
       st.integers(min_value=1, max_value=10**9))
def test_kronecker_periodicity(d, n):
    assert primes.kronecker_symbol(d, n) == primes.kronecker_symbol(d, n + abs(d))


def test_kronecker_rejects_negative_n():
    with pytest.raises(ValidationError):
        primes.kronecker_symbol(5, -1)


def test_fundamental_discriminants():
    fundamentals = [d for d in range(-30, 31) if primes.is_fundamental_discriminant(d)]
    assert fundamentals == [-24, -23, -20, -19, -15, -11, -8, -7, -4, -3,
                            5, 8, 12, 13, 17, 21, 24, 28, 29]


def test_character_table_zero_exactly_on_common_factor():
    table = primes.quadratic_character_table(-4)
    assert table.tolist() == [0.0, 1.0, 0.0, -1.0]
