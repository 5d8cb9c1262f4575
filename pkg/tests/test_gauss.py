import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import trapezoid

from twistlab.arith import is_squarefree
from twistlab.gauss import (GaussianBump, default_bump, gauss_G_bruteforce, gauss_G_closed, gauss_G_exact,
                            poisson_identity_residual, poisson_sides, tau, tau_bruteforce, unit_root)

odd = st.integers(0, 600).map(lambda m: 2 * m + 1)


def test_G_examples():
    assert gauss_G_closed(0, 9) == 6
    assert abs(gauss_G_closed(1, 3) - math.sqrt(3)) < 1e-12
    assert gauss_G_closed(1, 1) == 1
    assert abs(gauss_G_bruteforce(1, 3) - math.sqrt(3)) < 1e-12
    assert abs(gauss_G_bruteforce(0, 3)) < 1e-12
    assert abs(gauss_G_bruteforce(2, 1) - 1) < 1e-12


def test_tau_examples():
    assert abs(tau(1, 3) - 1j * math.sqrt(3)) < 1e-12
    assert abs(tau(0, 9) - 6) < 1e-12
    assert abs(tau(0, 15)) < 1e-12
    assert tau(5, 1) == 1


def test_even_modulus_rejected():
    for f in (gauss_G_closed, gauss_G_bruteforce, tau):
        with pytest.raises(ValueError, match="odd"):
            f(1, 4)


@given(st.integers(-60, 60), odd)
def test_closed_form_matches_brute_force(k, n):
    assert abs(gauss_G_closed(k, n) - gauss_G_bruteforce(k, n)) < 1e-9


@given(st.integers(-60, 60), odd)
def test_tau_relation(k, n):
    assert abs(tau(k, n) - tau_bruteforce(k, n)) < 1e-9


@given(st.integers(-20, 20), odd, odd)
def test_multiplicative(k, m, n):
    if math.gcd(m, n) != 1:
        return
    assert abs(gauss_G_closed(k, m * n) - gauss_G_closed(k, m) * gauss_G_closed(k, n)) < 1e-7


@given(st.integers(-60, 60), odd)
def test_exact_value_shape(k, n):
    g = gauss_G_exact(k, n)
    assert abs(g.value) <= n
    assert is_squarefree(g.radicand) and g.radicand % 2 == 1


def test_unit_root_reduction():
    assert abs(unit_root(10**9 + 0.25) - 1j) < 1e-9
    assert abs(unit_root(-0.5) + 1) < 1e-12
    assert abs(unit_root(0.125) - cmath.exp(0.25j * math.pi)) < 1e-15


def test_gaussian_bump_transform_by_quadrature():
    F = GaussianBump(3.0, 2.0)
    xs = np.linspace(-30, 36, 200001)
    for xi in (0.0, 0.1, 0.37):
        num = trapezoid(F(xs) * np.exp(-2j * np.pi * xs * xi), xs)
        assert abs(num - F.fourier(xi)) < 1e-9


def test_poisson_examples():
    F = default_bump(5, 7, 1, 64)
    assert poisson_identity_residual(F, 5, 7, 1, 64) < 1e-10
    F = default_bump(1, 8, 3, 64)
    r0 = poisson_identity_residual(F, 1, 8, 3, 0)
    r64 = poisson_identity_residual(F, 1, 8, 3, 64)
    assert r64 < 1e-9 and r64 < r0
    lhs, _ = poisson_sides(F, 1, 8, 3, 64)
    assert abs(lhs) > 0.1


def test_poisson_rejects_common_factor():
    with pytest.raises(ValueError, match="gcd"):
        poisson_sides(GaussianBump(0, 5), 1, 9, 3, 8)
