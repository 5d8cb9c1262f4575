import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twistlab.arith import kronecker
from twistlab.frobenius import prime_traces
from twistlab.mollifier import (A_factor, B_factor, MultiplicativeWeight, build_partition, expand_truncated_exp,
                                key_inequality_gap, key_inequality_suite, truncated_exp_check, truncated_exp_suite,
                                length_sequence, multiply_expansions, prime_sum, truncated_exp)

even = st.integers(0, 20).map(lambda m: 2 * m)


def exact_truncated_exp(ell, x: Fraction) -> Fraction:
    return sum(x**j / math.factorial(j) for j in range(ell + 1))


def test_truncated_exp_examples():
    assert truncated_exp(0, 123.0) == 1
    assert truncated_exp(2, -2) == 1
    assert truncated_exp(4, 1) == pytest.approx(65 / 24, rel=1e-15)


@given(st.integers(0, 40), st.fractions(-30, 30, max_denominator=64))
def test_truncated_exp_accuracy(ell, x):
    exact = exact_truncated_exp(ell, x)
    # error is measured against sum |x|^j / j!, the conditioning of the alternating sum
    scale = float(exact_truncated_exp(ell, abs(x)))
    assert abs(truncated_exp(ell, float(x)) - float(exact)) <= 1e-14 * (ell + 1) * scale


@settings(max_examples=300)
@given(even, st.floats(-50, 50))
def test_truncated_exp_pointwise(ell, x):
    assert truncated_exp_check(ell, x) == []


def test_truncated_exp_suite_and_odd_rejection():
    n, failures = truncated_exp_suite(trials=500, seed=3)
    assert n == 500 and not failures
    with pytest.raises(ValueError):
        truncated_exp_check(3, 0.0)


def test_key_inequality_examples():
    assert key_inequality_gap(0.0, [1.0, -2.0], [2, 4], 0.5) >= 0
    C = math.exp((math.exp(-2) + math.exp(-4)) / 16)
    gap = key_inequality_gap(1.0, [0.0, 0.0], [2, 4], 0.5)
    assert gap == pytest.approx(C - 1, abs=1e-14)
    with pytest.raises(ValueError):
        key_inequality_gap(1.0, [0.0], [3], 0.5)
    with pytest.raises(ValueError):
        key_inequality_gap(1.0, [0.0], [2], 1.5)


@settings(max_examples=300)
@given(st.floats(0, 1e3), st.lists(st.tuples(st.floats(-20, 20), st.integers(1, 6)), min_size=1, max_size=4),
       st.floats(0, 1))
def test_key_inequality_property(y, pairs, k):
    xs = [p[0] for p in pairs]
    ells = [2 * p[1] for p in pairs]
    assert key_inequality_gap(y, xs, ells, k) / max(1.0, y**k) >= -1e-10


def test_key_inequality_suite_small():
    n, failures = key_inequality_suite(trials=1000, seed=5)
    assert n == 1000 and not failures


def test_partition_examples(curve):
    part = build_partition(10**6, c=100, threshold=10**4)
    assert part.fallback and part.R == 1 and part.lengths[0] == 2 * math.ceil(100 * math.log(math.log(10**6)))
    part = build_partition(math.exp(math.exp(4)), c=10, threshold=2)
    assert part.fallback and part.lengths == (80,)
    assert length_sequence(math.exp(math.exp(4)), 10) == [80]
    with pytest.raises(ValueError):
        build_partition(10)


@pytest.mark.parametrize("X", [1e6, 1e12, 1e40])
def test_partition_invariants(X):
    part = build_partition(X)
    seen = set()
    for ps in part.sets:
        s = set(ps.tolist())
        assert not (s & seen) and not any(32 % p == 0 for p in s)
        seen |= s
    assert all(ell >= 2 and ell % 2 == 0 for ell in part.lengths)
    if not part.fallback:
        assert all(a > b for a, b in zip(part.lengths, part.lengths[1:]))


def test_partition_refuses_huge_prime_bounds():
    with pytest.raises(ValueError, match="too large"):
        build_partition(1e300)


def test_partition_from_cuts():
    part = build_partition(1e8, cuts=[30, 100], lengths=[6, 2])
    assert part.sets[0].tolist() == [3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert part.sets[1][0] == 31 and part.sets[1][-1] == 97
    with pytest.raises(ValueError):
        build_partition(1e8, cuts=[30], lengths=[3])


def test_prime_sum(curve):
    primes, traces = prime_traces(curve, 200)
    keep = primes > 2
    ps, ts = primes[keep], traces[keep]
    d = 17
    chis = np.array([kronecker(d, p) for p in ps.tolist()])
    direct = sum(t / math.sqrt(p) / math.sqrt(p) * c for p, t, c in zip(ps.tolist(), ts.tolist(), chis.tolist()))
    assert prime_sum(ps, ts, chis) == pytest.approx(direct, abs=1e-13)
    assert prime_sum(ps, ts, -chis) == pytest.approx(-direct, abs=1e-13)
    assert prime_sum([], [], []) == 0


def test_A_B_factors():
    assert A_factor(3.7, 6, 1.0) == 1
    assert B_factor(-2.1, 6, 0.0) == 1
    x = 1.9
    assert A_factor(x, 8, 0.5) == pytest.approx(truncated_exp(8, -0.5 * x))
    assert A_factor(x, 8, 0.5) == B_factor(-x, 8, 0.5)
    with pytest.raises(ValueError):
        A_factor(1.0, 2, -0.1)


def test_multiplicative_weight():
    mw = MultiplicativeWeight({3: 0.5, 5: -0.8})
    assert mw.a_tilde(3) == 0.5 and mw.a_tilde(45) == pytest.approx(0.25 * -0.8)
    assert mw.w(3**2 * 5**3) == 2 * 6 and mw.w(1) == 1
    assert mw.omega(3**2 * 5**3) == 5
    assert mw.b_flag(15, {3, 5}, 2) and not mw.b_flag(45, {3, 5}, 2) and not mw.b_flag(7, {3, 5}, 4)
    assert mw.p_flag(45, {3, 5}, 3) and not mw.p_flag(15, {3, 5}, 3)


def test_expansion_reproduces_truncated_exp(curve):
    primes, traces = prime_traces(curve, 40)
    a_at = {p: t / math.sqrt(p) for p, t in zip(primes.tolist(), traces.tolist()) if p > 2}
    ps = sorted(a_at)
    ell, scale = 4, -0.5
    coeffs = expand_truncated_exp(ps, a_at, ell, scale)
    for d in (17, -3, 105, -1003):
        P = sum(a_at[p] / math.sqrt(p) * kronecker(d, p) for p in ps)
        via = sum(c * kronecker(d, n) for n, c in coeffs.items())
        assert via == pytest.approx(truncated_exp(ell, scale * P), abs=1e-12)
    # support: at most ell prime factors from the set, so n <= max(P)^ell
    assert max(coeffs) <= max(ps) ** ell


def test_product_support_length(curve):
    part = build_partition(1e8, cuts=[12, 40], lengths=[4, 2])
    primes, traces = prime_traces(curve, 40)
    a_at = {p: t / math.sqrt(p) for p, t in zip(primes.tolist(), traces.tolist()) if p > 2}
    prod = {1: 1.0}
    for ps, ell in zip(part.sets, part.lengths):
        prod = multiply_expansions(prod, expand_truncated_exp(ps.tolist(), a_at, ell, 0.5))
    bound = math.prod(max(ps.tolist()) ** ell for ps, ell in zip(part.sets, part.lengths))
    assert max(prod) <= bound
