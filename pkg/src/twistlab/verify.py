"""Invariant suites. Each returns (cases checked, list of violation strings)."""

from __future__ import annotations

import math

import numpy as np

from .curve import CurveModel, default_curve
from .discriminants import TwistClass, admissible_classes, enumerate_class
from .gauss import (default_bump, gauss_G_bruteforce_many, gauss_G_exact, poisson_identity_residual,
                    poisson_tail_bound)
from .lvalues import DEFAULT_EPS, central_value
from .mollifier import key_inequality_suite, truncated_exp_suite
from .moments import charsum_average

POISSON_KS = (0, 8, 16, 32, 64)


def verify_gauss(n_max: int = 3000, k_max: int = 60, mult_max: int = 200, mult_k: int = 20, tol: float = 1e-10):
    bad, cases = [], 0
    ks = np.arange(-k_max, k_max + 1)
    for n in range(1, n_max + 1, 2):
        brute = gauss_G_bruteforce_many(ks, n)
        closed = np.array([gauss_G_exact(int(k), n).value for k in ks])
        err = np.abs(brute - closed)
        cases += ks.size
        for i in np.nonzero(err > tol)[0][:3]:
            bad.append(f"G_{ks[i]}({n}): closed {closed[i]:.6g} vs brute {brute[i]:.6g}")
    single = {(k, n): gauss_G_exact(k, n) for k in range(-mult_k, mult_k + 1) for n in range(1, mult_max + 1, 2)}
    for m in range(1, mult_max + 1, 2):
        for n in range(m, mult_max + 1, 2):
            if math.gcd(m, n) != 1:
                continue
            for k in range(-mult_k, mult_k + 1):
                cases += 1
                lhs, a, b = gauss_G_exact(k, m * n), single[k, m], single[k, n]
                # exact: coefficients multiply and coprime squarefree radicands multiply
                coeff = a.coeff * b.coeff
                if (lhs.coeff, lhs.radicand) != (coeff, a.radicand * b.radicand if coeff else 1):
                    bad.append(f"G_{k}({m}*{n}) != G_{k}({m}) G_{k}({n})")
    return cases, bad


def verify_poisson(cases: int = 100, seed: int = 0, tol: float = 1e-9, K: int = 64):
    """Residual at K below tol; residual at K=0 above residual at K; every
    intermediate residual within its tail majorant."""
    rng = np.random.default_rng(seed)
    bad = []
    for _ in range(cases):
        q = int(rng.integers(1, 21))
        while True:
            n = int(2 * rng.integers(0, 50) + 1)
            if math.gcd(n, q) == 1:
                break
        r = int(rng.integers(0, q))
        F = default_bump(r, q, n, K)
        res = {k: poisson_identity_residual(F, r, q, n, k) for k in POISSON_KS}
        tag = f"(r={r}, q={q}, n={n})"
        if res[K] >= tol:
            bad.append(f"{tag}: residual {res[K]:.3e} at K={K}")
        if not res[K] < res[0]:
            bad.append(f"{tag}: residual does not decrease from K=0 ({res[0]:.3e}) to K={K}")
        for k in POISSON_KS:
            bound = poisson_tail_bound(F, q, n, k)
            if res[k] > bound + 1e-12:
                bad.append(f"{tag}: residual {res[k]:.3e} exceeds tail bound {bound:.3e} at K={k}")
    return cases, bad


def verify_truncated_exp(trials: int = 10_000, seed: int = 0):
    n, failures = truncated_exp_suite(trials, seed)
    return n, [str(f) for f in failures]


def verify_key_inequality(trials: int = 10_000, seed: int = 0):
    n, failures = key_inequality_suite(trials, seed)
    return n, [str(f) for f in failures]


def verify_afe(curve: CurveModel | None = None, samples: int = 100, d_max: int = 10_000, seed: int = 0,
               cls: TwistClass | None = None, eps: float = DEFAULT_EPS, tol: float = 1e-8):
    curve = curve or default_curve()
    cls = cls or admissible_classes(curve)[0]
    pool = enumerate_class(cls, d_max).to_array()
    rng = np.random.default_rng(seed)
    ds = rng.choice(pool, size=min(samples, pool.size), replace=False)
    bad = []
    for d in sorted(ds.tolist(), key=abs):
        try:
            a = central_value(d, cls, eps=eps)
            b = central_value(d, cls, eps=eps, trunc_scale=2.0)
        except ArithmeticError as exc:
            bad.append(f"d={d}: {exc}")
            continue
        if abs(a - b) >= tol:
            bad.append(f"d={d}: doubling truncation moved L by {abs(a - b):.3e}")
        if min(a, b) < -1e-6:
            bad.append(f"d={d}: negative central value {min(a, b):.3e}")
    return int(ds.size), bad


CHARSUM_PAIRS = ((1, 1), (9, 1), (1, 3))  # (9, 3) violates gcd(n, v) = 1
CHARSUM_NONSQUARE = (3, 5)


def verify_charsum(curve: CurveModel | None = None, X: float = 1e6, cls: TwistClass | None = None,
                   tol: float = 0.05):
    curve = curve or default_curve()
    cls = cls or admissible_classes(curve)[0]
    bad, reports = [], []
    for n, v in CHARSUM_PAIRS:
        r = charsum_average(cls, n, v, X)
        reports.append(r)
        if not r.rel_err < tol:
            bad.append(f"n={n}, v={v}: relative error {r.rel_err:.3e} vs main term")
    for n in CHARSUM_NONSQUARE:
        r = charsum_average(cls, n, 1, X)
        reports.append(r)
        bound = X**0.55 * math.sqrt(n)
        if abs(r.empirical) > bound:
            bad.append(f"n={n}: |sum| {abs(r.empirical):.3e} > X^0.55 sqrt(n) = {bound:.3e}")
    return len(reports), bad


SUITES = {
    "gauss": verify_gauss,
    "poisson": verify_poisson,
    "key-inequality": verify_key_inequality,
    "lemma1": verify_truncated_exp,
    "afe": verify_afe,
    "charsum": verify_charsum,
}
