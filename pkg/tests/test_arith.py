import math

import numpy as np
from hypothesis import given, strategies as st

from twistlab.arith import (factorize, is_square, is_squarefree, jacobi, kronecker, mobius, primes_upto,
                            squarefree_decomposition)


def euler_criterion(d, p):
    r = pow(d % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def test_kronecker_matches_euler_criterion():
    for p in primes_upto(1000)[1:].tolist():
        for d in range(-1000, 1001):
            assert kronecker(d, p) == euler_criterion(d, p)


def test_kronecker_at_two():
    assert kronecker(17, 2) == 1
    assert kronecker(5, 2) == -1
    assert kronecker(-7, 1) == 1


@given(st.integers(-10**6, 10**6), st.integers(1, 2000), st.integers(1, 2000))
def test_kronecker_completely_multiplicative(d, m, n):
    assert kronecker(d, m * n) == kronecker(d, m) * kronecker(d, n)


@given(st.integers(-10**6, 10**6), st.integers(1, 10**4))
def test_kronecker_vanishes_iff_common_factor(d, n):
    assert (kronecker(d, n) == 0) == (math.gcd(d, n) > 1)


@given(st.integers(1, 10**7))
def test_factorize_reconstructs(n):
    f = factorize(n) if n > 1 else {}
    assert math.prod(p**e for p, e in f.items()) == n
    assert all(len(factorize(p)) == 1 for p in f)


@given(st.integers(1, 10**7))
def test_squarefree_decomposition(u):
    u1, u2 = squarefree_decomposition(u)
    assert u1 * u2 * u2 == u and is_squarefree(u1)


@given(st.integers(0, 10**12))
def test_is_square(n):
    assert is_square(n) == (math.isqrt(n) ** 2 == n)


def test_mobius_sums_to_zero():
    for n in range(2, 200):
        divs = [d for d in range(1, n + 1) if n % d == 0]
        assert sum(mobius(d) for d in divs) == 0


def test_jacobi_odd_modulus():
    assert jacobi(2, 15) == 1
    assert jacobi(0, 1) == 1
    assert primes_upto(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert np.all(np.diff(primes_upto(10**5)) > 0)
