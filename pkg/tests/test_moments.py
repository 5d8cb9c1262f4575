import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twistlab.curve import CurveModel
from twistlab.discriminants import TwistClass, admissible_classes, enumerate_class
from twistlab.moments import (C_values, G_euler, G_local, charsum_average, charsum_main_term, diagonal_series,
                              elementary_symmetric, first_moment, first_moment_density, gaussian_moment,
                              gaussian_tail, logL_distribution, pc_moments, pd_moments, pd_oracle,
                              tamagawa_statistic, tamagawa_window, power_moment_ratio)


def test_gaussian_moments():
    assert gaussian_moment(0) == 1 and gaussian_moment(1) == 0
    assert gaussian_moment(2) == 1 and gaussian_moment(4) == 3 and gaussian_moment(6) == 15
    assert isinstance(gaussian_moment(8), Fraction)
    with pytest.raises(ValueError):
        gaussian_moment(-1)


# ---------------------------------------------------------------- character sums

def test_charsum_square_main_terms(cls17):
    r1 = charsum_average(cls17, 1, 1, 2e5)
    r9 = charsum_average(cls17, 9, 1, 2e5)
    assert r1.rel_err < 0.02 and r9.rel_err < 0.05
    assert r9.oracle == pytest.approx(r1.oracle / (1 + 1 / 3))


def test_charsum_preconditions(cls17):
    with pytest.raises(ValueError):
        charsum_average(cls17, 9, 3, 1e6)  # gcd(n, v) > 1
    with pytest.raises(ValueError):
        charsum_average(cls17, 2, 1, 1e6)  # shares a factor with N0
    with pytest.raises(ValueError):
        charsum_average(cls17, 10**6 + 3, 1, 1e4)  # v sqrt(n) too large


def test_charsum_nonsquare_grid(curve):
    cases = 0
    for cls in admissible_classes(curve)[:4]:
        for n in (3, 5, 7, 11, 15):
            r = charsum_average(cls, n, 1, 1e5)
            assert r.oracle == 0 and abs(r.empirical) <= 1e5**0.55 * math.sqrt(n)
            cases += 1
    assert cases == 20


# ---------------------------------------------------------------- first moment oracle

def test_G_local_examples():
    p = 7
    x = 1 / p
    assert G_local(0.0, p, "generic") == pytest.approx((1 - x) ** 2 * (1 + x * (1 + 2 * x + x * x) + x))
    assert G_local(0.3, 3, "u1") == pytest.approx(4 / 9)
    assert G_local(0.3, 3, "u2") == pytest.approx((2 / 3) * (8 / 9))


def test_G_cutoff_convergence(curve):
    assert abs(G_euler(curve, 1, 1, 10**5) - G_euler(curve, 1, 1, 2 * 10**5)) < 1e-3
    val, tail = G_euler(curve, 1, 1, 10**5, with_tail=True)
    assert tail < 1e-5


def test_G_factorisation(curve):
    base = G_euler(curve, 1, 1)
    rng = np.random.default_rng(2)
    odd = [n for n in range(3, 400, 2)]
    pairs = 0
    while pairs < 20:
        u, v = rng.choice(odd, size=2).tolist()
        if math.gcd(u, v) != 1 or not all(v % (p * p) for p in range(3, 20, 2)):
            continue
        lhs = G_euler(curve, u, 1) * G_euler(curve, 1, v) / base
        assert lhs == pytest.approx(G_euler(curve, u, v), rel=1e-8)
        pairs += 1


def test_G_preconditions(curve):
    with pytest.raises(ValueError):
        G_euler(curve, 3, 3)
    with pytest.raises(ValueError):
        G_euler(curve, 2, 1)


def test_first_moment_small(cls17):
    r = first_moment(cls17, 1, 1, 5000)
    assert 0.8 < r.ratio < 1.2
    r9 = first_moment(cls17, 9, 1, 5000)
    # u = 9 is a square, so a(u1) = 1
    assert r9.extra["a_u1"] == 1 and r9.extra["u1"] == 1


def test_first_moment_v_scaling(cls17):
    r1 = first_moment(cls17, 1, 1, 5000)
    r3 = first_moment(cls17, 1, 3, 5000)
    h3 = G_euler(cls17.curve, 1, 3) / G_euler(cls17.curve, 1, 1)
    assert r3.oracle == pytest.approx(r1.oracle * h3 / 3)


# ---------------------------------------------------------------- prime sums

def test_diagonal_series_leading_term():
    pairs = [(q / (q + 1), b) for q, b in [(3, 0.4), (5, -0.9), (7, 0.2)]]
    w = [b * b * c for c, b in pairs]
    # k = 2: exact, no correction
    assert diagonal_series(pairs, 2) == pytest.approx(elementary_symmetric(w, 1))
    assert diagonal_series(pairs, 3) == 0
    # k = 4: leading 3 * 2! * e2 plus the single-prime fourth powers c b^4
    lead = 3 * 2 * elementary_symmetric(w, 2)
    extra = sum(c * b**4 for c, b in pairs)
    assert diagonal_series(pairs, 4) == pytest.approx(lead + extra)


def test_pd_moments(cls17):
    r0 = pd_moments(cls17, 0, 1e5)
    assert r0.ratio == 1
    r2 = pd_moments(cls17, 2, 1e5)
    assert 0.9 < r2.ratio < 1.1
    r1 = pd_moments(cls17, 1, 1e5)
    assert abs(r1.empirical) <= 1e5**0.6
    with pytest.raises(ValueError):
        pd_moments(cls17, 2, 1e4, v=10**3 + 1)


def test_pd_oracle_correction_reported(curve):
    orc = pd_oracle(curve, [3, 5, 7, 13], 4, 100.0)
    assert orc["full"] == pytest.approx(orc["leading"] + orc["correction"])


def test_tamagawa_statistic_signs(curve):
    X = math.exp(300)  # window [log X, z] is empty until log X exceeds (log log X)^3
    window = tamagawa_window(curve, X)
    assert window.size > 0
    d = 1
    val = tamagawa_statistic(d, X, curve)
    expected = -sum(math.log(4) / (p + 1) for p in window.tolist())
    assert val == pytest.approx(expected) and val < 0
    with pytest.raises(ValueError):
        tamagawa_statistic(17, 10, curve)


def test_tamagawa_statistic_zero_without_roots():
    # x^3 - 2 has no roots mod 7, 13, 19 and so on; restrict to such a window
    c = CurveModel(0, 0, -2, N=1728, bad_prime_traces={2: 0, 3: 0})
    assert C_values(np.array([7 * 13]), c, [7, 13, 19]).tolist() == [0.0]


def test_tamagawa_mean_near_zero(curve, cls17):
    window = [p for p in range(3, 200) if all(p % q for q in range(2, int(p**0.5) + 1))]
    ds = enumerate_class(cls17, 10**6).to_array()
    C = C_values(ds, curve, window)
    assert abs(C.mean()) < 3 * C.std() / math.sqrt(ds.size) + 0.01


def test_pc_moments_window_reported(cls17):
    r0 = pc_moments(cls17, 0, 1e4)
    assert r0.empirical == 1
    r2 = pc_moments(cls17, 2, 1e4)
    assert r2.extra["window_primes"] == 0
    with pytest.raises(ValueError):
        pc_moments(cls17, 7, 1e4)


# ---------------------------------------------------------------- distributions

def test_gaussian_tail():
    assert gaussian_tail(0) == 0.5
    assert gaussian_tail(1) == pytest.approx(0.15865525393145707)


def test_logL_distribution_small(curve):
    rep = logL_distribution(curve, 3000)
    assert all(0 <= t <= 1 for t in rep.tail)
    assert all(b <= a for a, b in zip(rep.tail, rep.tail[1:]))
    assert rep.tail[0] <= 1
    assert 0 <= rep.extra["vanishing_share"] < 1
    adj = logL_distribution(curve, 3000, adjust=True)
    assert adj.sample_size > 0


def test_power_moment_ratio_small(curve):
    r0 = power_moment_ratio(curve, 0, [1000, 2000, 4000])
    assert max(r0) / min(r0) < 1.5
    with pytest.raises(ValueError):
        power_moment_ratio(curve, 1.5, [1000])
    with pytest.raises(ValueError):
        power_moment_ratio(curve, 0.5, [2000, 1000])


def test_first_moment_density_positive(curve):
    assert first_moment_density(curve) > 0
