"""Moment sums over twist families and their main-term oracles."""

from __future__ import annotations

import math
import time
from fractions import Fraction

import numpy as np
from scipy.special import erfc

from .arith import factorize, is_square, is_squarefree, primes_upto, squarefree_decomposition
from .coefficients import coefficient_table, sym2_local_log, symmetric_square_L
from .curve import CurveModel
from .discriminants import TwistClass, admissible_classes, chi_over_d, enumerate_class
from .frobenius import prime_traces
from .lvalues import DEFAULT_EPS, SmoothCutoff, central_values, kernel_for
from .reports import DistributionReport, MomentReport

ZERO_L = 1e-6
SYM2_CUTOFF = 1_000_000


def gaussian_moment(k: int) -> Fraction:
    """E[Z^k] for a standard normal Z, as an exact rational."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k % 2:
        return Fraction(0)
    return Fraction(math.factorial(k), 2 ** (k // 2) * math.factorial(k // 2))


def _weighted_family(cls: TwistClass, X: float, phi: SmoothCutoff, v: int = 1, prime_only=False):
    ds = enumerate_class(cls, int(math.floor(2.5 * X)), prime_only, lo=int(math.floor(X / 2))).to_array()
    if v > 1:
        ds = ds[ds % v == 0]
    w = phi(np.abs(ds) / X)
    keep = w > 0
    return ds[keep], np.asarray(w[keep], dtype=np.float64)


def _euler_1_minus_inv_sq(curve: CurveModel) -> float:
    """prod over p not dividing N0 of (1 - p^-2)."""
    local = math.prod(1.0 - 1.0 / p**2 for p in curve.N0_primes)
    return (6.0 / math.pi**2) / local


def charsum_main_term(cls: TwistClass, n: int, v: int, X: float, phi: SmoothCutoff | None = None) -> float:
    if not is_square(n):
        return 0.0
    phi = phi or SmoothCutoff()
    curve = cls.curve
    out = phi.mass * X / (v * curve.N0) * _euler_1_minus_inv_sq(curve)
    for p in set(factorize(n * v)) if n * v > 1 else ():
        out /= 1.0 + 1.0 / p
    return out


def _check_charsum_args(curve, n, v, X, margin=0.05):
    if n < 1 or math.gcd(n, curve.N0) != 1:
        raise ValueError("n must be a positive integer coprime to N0")
    if v < 1 or not is_squarefree(v) or math.gcd(v, n * curve.N0) != 1:
        raise ValueError("v must be squarefree and coprime to n*N0")
    if v * math.sqrt(n) > X ** (0.5 - margin):
        raise ValueError(f"v*sqrt(n) = {v * math.sqrt(n):.3g} exceeds X^(1/2 - {margin})")


def charsum_average(cls: TwistClass, n: int, v: int, X: float, phi: SmoothCutoff | None = None) -> MomentReport:
    """Weighted sum of chi_d(n) over the class with v | d, against its main term."""
    t0 = time.perf_counter()
    phi = phi or SmoothCutoff()
    _check_charsum_args(cls.curve, n, v, X)
    ds, w = _weighted_family(cls, X, phi, v)
    emp = math.fsum((chi_over_d(ds, n) * w).tolist())
    oracle = charsum_main_term(cls, n, v, X, phi)
    extra = {"class": cls.label(), "n": n, "v": v, "count": int(ds.shape[0]),
             "square_root_bound": X**0.55 * math.sqrt(n)}
    return MomentReport("charsum", X, 0, emp, oracle, None if oracle else abs(emp),
                        time.perf_counter() - t0, extra)


# ---------------------------------------------------------------- first moment

def _good_prime_data(curve: CurveModel, cutoff: int):
    primes, traces = prime_traces(curve, cutoff)
    keep = curve.N0 % primes != 0
    return primes[keep], traces[keep] / np.sqrt(primes[keep].astype(np.float64))


def G_local(ap: float, p: int, kind: str) -> float:
    """Euler factor of G(1; u, v) at s = 0 for a prime not dividing N0.

    kind: "generic" (p does not divide uv), "u1" (odd power in u), "u2" (even
    power in u), "v" (p | v, where chi_d(p) = 0 leaves only the density factor).
    """
    x = 1.0 / p
    # (1 - alpha^2 x)(1 - beta^2 x) = 1 - (a^2 - 2) x + x^2
    sym = 1 - (ap * ap - 2) * x + x * x
    if kind == "u1":
        return (1 - x) ** 2
    if kind == "u2":
        return (1 - x) * (1 - x * x)
    if kind == "v":
        return (1 - x) ** 2 * sym
    return (1 - x) ** 2 * (1 + x * sym + x)


def _prime_kinds(u: int, v: int) -> dict:
    u1, _ = squarefree_decomposition(u)
    kinds = {}
    for p in (factorize(u) if u > 1 else {}):
        kinds[p] = "u1" if u1 % p == 0 else "u2"
    for p in (factorize(v) if v > 1 else {}):
        kinds[p] = "v"
    return kinds


def G_euler(curve: CurveModel, u: int, v: int, cutoff: int = SYM2_CUTOFF, with_tail: bool = False):
    """G(1; u, v) as a truncated Euler product (generic factors are 1 + O(p^-2))."""
    if math.gcd(u, v) != 1 or math.gcd(u * v, curve.N0) != 1:
        raise ValueError("need gcd(u, v) = 1 and gcd(uv, N0) = 1")
    kinds = _prime_kinds(u, v)
    primes, ap = _good_prime_data(curve, cutoff)
    x = 1.0 / primes
    logs = np.log((1 - x) ** 2 * (1 + x * (1 - (ap * ap - 2) * x + x * x) + x))
    total = math.fsum(logs.tolist())
    for p, kind in kinds.items():
        a = curve.trace_of_frobenius(p) / math.sqrt(p)
        if p <= cutoff:
            total -= math.log(G_local(a, p, "generic"))
        total += math.log(G_local(a, p, kind))
    # p | N0: inverse of the symmetric-square factor used there
    for p in curve.N0_primes:
        ap_n = curve.bad_prime_traces[p] / math.sqrt(p)
        if curve.N % p == 0:
            total += math.log1p(-(ap_n**2) / p)
        else:
            total -= float(sym2_local_log(np.array([ap_n]), np.array([p]))[0])
    val = math.exp(total)
    if with_tail:
        # generic log-factor is O(3/p^2); bound the omitted primes
        return val, 3.0 / (cutoff * math.log(cutoff))
    return val


def first_moment_oracle(cls: TwistClass, u: int, v: int, X: float, phi: SmoothCutoff | None = None,
                        cutoff: int = SYM2_CUTOFF) -> dict:
    phi = phi or SmoothCutoff()
    curve = cls.curve
    u1, _ = squarefree_decomposition(u)
    a_u1 = coefficient_table(curve, max(u1, 2)).a[u1] if u1 > 1 else 1.0
    La = kernel_for(cls).L_a(0.5).real
    sym2 = symmetric_square_L(curve, cutoff)
    G = G_euler(curve, u, v, cutoff)
    main = 2 * X * a_u1 / (v * math.sqrt(u1) * curve.N0) * phi.mass * La * sym2 * G
    return {"main": main, "L_a_half": La, "sym2_L1": sym2, "G": G, "a_u1": a_u1, "u1": u1,
            "phi_check_0": phi.mass, "sym2_bad_prime_rule": "degree-1 fallback"}


def first_moment(cls: TwistClass, u: int, v: int, X: float, phi: SmoothCutoff | None = None,
                 eps: float = DEFAULT_EPS, workers: int = 1, cutoff: int = SYM2_CUTOFF) -> MomentReport:
    """Weighted sum of L(1/2, E_d) chi_d(u) over v | d, against the first-moment main term."""
    t0 = time.perf_counter()
    phi = phi or SmoothCutoff()
    curve = cls.curve
    if math.gcd(u, v) != 1 or math.gcd(u * v, curve.N0) != 1 or not is_squarefree(v):
        raise ValueError("need gcd(u,v)=1, gcd(uv,N0)=1 and v squarefree")
    ds, w = _weighted_family(cls, X, phi, v)
    L, _ = central_values(cls, ds, eps, workers=workers)
    chi_u = chi_over_d(ds, u) if u > 1 else np.ones(ds.shape[0])
    emp = math.fsum((L * chi_u * w).tolist())
    orc = first_moment_oracle(cls, u, v, X, phi, cutoff)
    extra = {k: val for k, val in orc.items() if k != "main"}
    extra.update({"class": cls.label(), "u": u, "v": v, "count": int(ds.shape[0])})
    return MomentReport("first_moment", X, 1, emp, orc["main"], None, time.perf_counter() - t0, extra)


# ---------------------------------------------------------------- prime sums P(d), C(d)

def default_z(X: float) -> float:
    return X ** (1.0 / math.log(math.log(X)) ** 2)


def prime_sum_primes(curve: CurveModel, z: float, exclude: int = 1) -> np.ndarray:
    ps = primes_upto(int(math.floor(z)))
    return np.array([p for p in ps.tolist() if curve.N0 % p and exclude % p], dtype=np.int64)


def P_values(ds: np.ndarray, curve: CurveModel, primes) -> np.ndarray:
    """P(d) = sum_p a(p) chi_d(p) / sqrt(p) for each d (a(p)/sqrt(p) = A(p)/p)."""
    out = np.zeros(ds.shape[0], dtype=np.float64)
    primes = list(primes)
    if not primes:
        return out
    _, traces = prime_traces(curve, max(primes))
    all_p = primes_upto(max(primes))
    tr = dict(zip(all_p.tolist(), traces.tolist()))
    for p in primes:
        if tr[p]:
            out += tr[p] / p * chi_over_d(ds, p)
    return out


def diagonal_series(weights: list[float], k: int) -> float:
    """k! [t^k] prod_q (1 + c_q (cosh(b_q t) - 1)) for pairs (c_q, b_q) = weights."""
    if k % 2:
        return 0.0
    half = k // 2
    poly = [1.0] + [0.0] * half
    for c, b in weights:
        if b == 0.0 or c == 0.0:
            continue
        # series in u = t^2: 1 + c * sum_{m>=1} b^(2m) u^m / (2m)!
        factor = [1.0] + [c * b ** (2 * m) / math.factorial(2 * m) for m in range(1, half + 1)]
        new = [0.0] * (half + 1)
        for i, a in enumerate(poly):
            if a == 0.0:
                continue
            for j in range(half + 1 - i):
                new[i + j] += a * factor[j]
        poly = new
    return math.factorial(k) * poly[half]


def elementary_symmetric(values: list[float], r: int) -> float:
    e = [1.0] + [0.0] * r
    for x in values:
        for j in range(r, 0, -1):
            e[j] += e[j - 1] * x
    return e[r]


def pd_oracle(curve: CurveModel, primes, k: int, count_sum: float) -> dict:
    """Diagonal main term of sum P(d)^k Phi over d, from perfect-square prime products.

    Returns the full diagonal sum and its leading part (all multiplicities 2).
    """
    _, traces = prime_traces(curve, max(list(primes) + [2]))
    all_p = primes_upto(max(list(primes) + [2]))
    tr = dict(zip(all_p.tolist(), traces.tolist()))
    pairs = [(q / (q + 1.0), tr[q] / q) for q in primes]
    full = count_sum * diagonal_series(pairs, k)
    if k % 2:
        lead = 0.0
    else:
        w = [(tr[q] / q) ** 2 * q / (q + 1.0) for q in primes]  # a(q)^2/(q+1)
        lead = count_sum * float(gaussian_moment(k)) * math.factorial(k // 2) * elementary_symmetric(w, k // 2)
    return {"full": full, "leading": lead, "correction": full - lead}


def pd_moments(cls: TwistClass, k: int, X: float, v: int = 1, z: float | None = None,
               phi: SmoothCutoff | None = None) -> MomentReport:
    t0 = time.perf_counter()
    phi = phi or SmoothCutoff()
    if v > X**0.45:
        raise ValueError("v must be at most X^0.45")
    curve = cls.curve
    z = z or default_z(X)
    primes = prime_sum_primes(curve, z, exclude=v)
    ds, w = _weighted_family(cls, X, phi, v)
    P = P_values(ds, curve, primes)
    emp = math.fsum((P**k * w).tolist())
    count_sum = math.fsum(w.tolist())
    orc = pd_oracle(curve, primes.tolist(), k, count_sum)
    lglg = math.log(math.log(X))
    extra = {"class": cls.label(), "v": v, "z": z, "primes_in_P": int(primes.shape[0]),
             "count_sum": count_sum, "oracle_leading": orc["leading"],
             "oracle_correction": orc["correction"],
             "normalized_by_X": emp / (X * lglg ** (k / 2)),
             "normalized_by_count": emp / (count_sum * lglg ** (k / 2)) if count_sum else 0.0,
             "gaussian_moment": float(gaussian_moment(k))}
    oracle = orc["full"]
    rel = None if oracle else abs(extra["normalized_by_X"])
    return MomentReport("pd_moment", X, k, emp, oracle, rel, time.perf_counter() - t0, extra)


def tamagawa_window(curve: CurveModel, X: float, z: float | None = None, lo: float | None = None) -> np.ndarray:
    """Good primes p with log X <= p <= z."""
    z = default_z(X) if z is None else z
    lo = math.log(X) if lo is None else lo
    ps = primes_upto(int(math.floor(z)))
    ps = ps[ps >= lo]
    bad = curve.N0 * abs(curve.disc)
    return np.array([p for p in ps.tolist() if bad % p], dtype=np.int64)


def C_values(ds: np.ndarray, curve: CurveModel, window) -> np.ndarray:
    """C(d) = sum over the window of (p/(p+1)) log c(p) if p | d, else -(1/(p+1)) log c(p)."""
    out = np.zeros(ds.shape[0], dtype=np.float64)
    for p in list(window):
        lc = math.log(curve.tamagawa_root_count(int(p)))
        if lc == 0.0:
            continue
        div = ds % p == 0
        out += np.where(div, p / (p + 1.0) * lc, -lc / (p + 1.0))
    return out


def tamagawa_statistic(d: int, X: float, curve: CurveModel, z: float | None = None) -> float:
    if X < 16:
        raise ValueError("X must be at least 16")
    return float(C_values(np.array([d], dtype=np.int64), curve, tamagawa_window(curve, X, z))[0])


def pc_moments(cls: TwistClass, k: int, X: float, z: float | None = None, window_lo: float | None = None,
               phi: SmoothCutoff | None = None) -> MomentReport:
    if k > 6:
        raise ValueError("k must be at most 6")
    t0 = time.perf_counter()
    phi = phi or SmoothCutoff()
    curve = cls.curve
    z = z or default_z(X)
    ds, w = _weighted_family(cls, X, phi)
    P = P_values(ds, curve, prime_sum_primes(curve, z))
    window = tamagawa_window(curve, X, z, window_lo)
    C = C_values(ds, curve, window)
    sigma2 = curve.splitting_class().sigma2
    count_sum = math.fsum(w.tolist())
    lglg = math.log(math.log(X))
    emp = math.fsum(((P - C) ** k * w).tolist())
    normalized = emp / (count_sum * (sigma2 * lglg) ** (k / 2))
    Mk = float(gaussian_moment(k))
    extra = {"class": cls.label(), "z": z, "window_primes": int(window.shape[0]),
             "window": [window_lo if window_lo is not None else math.log(X), z],
             "raw_sum": emp, "count_sum": count_sum, "sigma2": sigma2}
    rel = abs(normalized / Mk - 1) if Mk else abs(normalized)
    return MomentReport("pc_moment", X, k, normalized, Mk, rel, time.perf_counter() - t0, extra)


# ---------------------------------------------------------------- distributions

def gaussian_tail(V: float) -> float:
    return 0.5 * float(erfc(V / math.sqrt(2.0)))


def family_values(curve: CurveModel, X: float, lo: float = 0, prime_only: bool = False,
                  eps: float = DEFAULT_EPS, workers: int = 1, classes=None):
    """(d, L) over every admissible class with lo < |d| <= X."""
    classes = classes or admissible_classes(curve)
    all_d, all_L = [], []
    for cls in classes:
        ds = enumerate_class(cls, int(X), prime_only, lo=int(lo)).to_array()
        if ds.size == 0:
            continue
        L, _ = central_values(cls, ds, eps, workers=workers)
        all_d.append(ds)
        all_L.append(L)
    if not all_d:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    return np.concatenate(all_d), np.concatenate(all_L)


def _sum_log_c_dividing(ds, curve: CurveModel) -> np.ndarray:
    """sum over primes p | d with p not dividing N disc(f) of log c(p)."""
    out = np.zeros(ds.shape[0], dtype=np.float64)
    bad = curve.N0 * abs(curve.disc)
    for i, d in enumerate(ds.tolist()):
        if abs(d) > 1:
            out[i] = sum(math.log(curve.tamagawa_root_count(p)) for p in factorize(d) if bad % p)
    return out


def logL_distribution(curve: CurveModel, X: float, adjust: bool = False, prime_only: bool = False,
                      V_grid=(-2.0, -1.0, 0.0, 1.0, 2.0), eps: float = DEFAULT_EPS, workers: int = 1,
                      zero_threshold: float = ZERO_L) -> DistributionReport:
    lo = X / math.log(X) if adjust else 20
    ds, L = family_values(curve, X, lo, prime_only, eps, workers)
    zero = L < zero_threshold
    logL = np.where(zero, -np.inf, np.log(np.where(zero, 1.0, L)))
    if adjust:
        sc = curve.splitting_class()
        lglg = math.log(math.log(X))
        stat = (logL - _sum_log_c_dividing(ds, curve) - sc.mu * lglg) / math.sqrt(sc.sigma2 * lglg)
    else:
        lglg = np.log(np.log(np.abs(ds).astype(np.float64)))
        stat = (logL + 0.5 * lglg) / np.sqrt(lglg)
    n = int(ds.shape[0])
    tail = tuple(float(np.count_nonzero(stat >= V)) / n if n else 0.0 for V in V_grid)
    g = tuple(gaussian_tail(V) for V in V_grid)
    extra = {"vanishing_share": float(np.count_nonzero(zero)) / n if n else 0.0,
             "zero_threshold": zero_threshold, "deficit_at_0": g[list(V_grid).index(0.0)] - tail[list(V_grid).index(0.0)]
             if 0.0 in V_grid else None,
             "range": [lo, X], "prime_only": prime_only}
    label = "logL_adjusted" if adjust else "logL"
    return DistributionReport(label, X, tuple(V_grid), tail, g, n, extra)


def power_moment_ratio(curve: CurveModel, k: float, X_grid, eps: float = DEFAULT_EPS, workers: int = 1) -> list[float]:
    """sum_{|d| <= X} L(1/2, E_d)^k / (X (log X)^{k(k-1)/2}) at each X."""
    if not 0 <= k <= 1:
        raise ValueError("k must lie in [0, 1]")
    X_grid = list(X_grid)
    if any(b <= a for a, b in zip(X_grid, X_grid[1:])):
        raise ValueError("X grid must be strictly increasing")
    ds, L = family_values(curve, max(X_grid), 0, False, eps, workers)
    absd = np.abs(ds)
    powered = np.where(L > 0, np.abs(L) ** k, 0.0) if k > 0 else np.ones_like(L)
    out = []
    for X in X_grid:
        s = math.fsum(powered[absd <= X].tolist())
        out.append(s / (X * math.log(X) ** (k * (k - 1) / 2)))
    return out


def first_moment_density(curve: CurveModel, cutoff: int = SYM2_CUTOFF) -> float:
    """Predicted limit of power_moment_ratio at k = 1: sum over classes of 2 L_a(1/2) L(1,sym^2) G / N0."""
    sym2 = symmetric_square_L(curve, cutoff)
    G = G_euler(curve, 1, 1, cutoff)
    return sum(2 * kernel_for(c).L_a(0.5).real for c in admissible_classes(curve)) * sym2 * G / curve.N0
