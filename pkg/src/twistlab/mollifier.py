"""Truncated exponentials, prime partitions and the key inequality for L-value powers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from .arith import factorize, primes_upto
from .curve import CurveModel, default_curve


def truncated_exp(ell: int, x: float) -> float:
    """E_ell(x) = sum_{j <= ell} x^j / j!, terms accumulated with math.fsum."""
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    terms = [1.0]
    t = 1.0
    for j in range(1, ell + 1):
        t *= x / j
        terms.append(t)
    return math.fsum(terms)


def truncated_exp_mp(ell: int, x) -> mp.mpf:
    """E_ell(x) in the current mpmath precision (used where doubles cannot resolve the gap)."""
    x = mp.mpf(x)
    total = mp.mpf(1)
    t = mp.mpf(1)
    for j in range(1, ell + 1):
        t = t * x / j
        total += t
    return total


# ---------------------------------------------------------------- properties of E_ell

@dataclass
class InequalityFailure:
    name: str
    params: dict
    slack: float

    def __str__(self):
        return f"{self.name} {self.params} slack={self.slack:.3e}"


def _rel(slack, scale):
    return float(slack / max(mp.mpf(1), abs(scale)))


def truncated_exp_check(ell: int, x: float, h: float = 1e-3, tol: float = -1e-10, dps: int = 80) -> list[InequalityFailure]:
    """Every pointwise claim about E_ell at x, with slack measured relative to max(1, |value|)."""
    if ell % 2:
        raise ValueError("ell must be even")
    out = []
    with mp.workdps(dps):
        E = truncated_exp_mp(ell, x)
        ex = mp.exp(mp.mpf(x))
        s = _rel(E, 1)
        if not E > 0:
            out.append(InequalityFailure("positive", {"ell": ell, "x": x}, s))
        second = truncated_exp_mp(ell, x - h) - 2 * E + truncated_exp_mp(ell, x + h)
        s = _rel(second, E)
        if s < tol:
            out.append(InequalityFailure("convex", {"ell": ell, "x": x, "h": h}, s))
        if x <= 0:
            s = _rel(E - ex, ex)
            if s < tol:
                out.append(InequalityFailure("above_exp", {"ell": ell, "x": x}, s))
        if ell > 0 and x <= ell / math.e**2:
            s = _rel((1 + mp.exp(-ell) / 16) * E - ex, ex)
            if s < tol:
                out.append(InequalityFailure("exp_bound", {"ell": ell, "x": x}, s))
    return out


def truncated_exp_suite(trials: int = 10_000, seed: int = 0, ell_max: int = 40, x_range=(-50.0, 50.0)) -> tuple[int, list]:
    rng = np.random.default_rng(seed)
    ells = 2 * rng.integers(0, ell_max // 2 + 1, size=trials)
    xs = rng.uniform(*x_range, size=trials)
    failures = []
    for ell, x in zip(ells.tolist(), xs.tolist()):
        failures += truncated_exp_check(ell, x)
    return trials, failures


# ---------------------------------------------------------------- the key inequality

def key_inequality_rhs(y: float, xs, ells, k: float) -> float:
    xs = [float(v) for v in xs]
    ells = [int(v) for v in ells]
    if len(xs) != len(ells):
        raise ValueError("xs and ells must have equal length")
    for ell in ells:
        if ell <= 0 or ell % 2:
            raise ValueError(f"ell={ell} must be a positive even integer")
    if not 0 <= k <= 1:
        raise ValueError("k must lie in [0, 1]")
    C = math.exp(sum(math.exp(-ell) for ell in ells) / 16.0)
    R = len(xs)
    A = [truncated_exp(ell, (k - 1) * x) for x, ell in zip(xs, ells)]
    B = [truncated_exp(ell, k * x) for x, ell in zip(xs, ells)]
    terms = [C * k * y * math.prod(A), C * (1 - k) * math.prod(B)]
    for r in range(R):
        tail = (math.e**2 * xs[r] / ells[r]) ** ells[r]
        terms.append((C * k * y * math.prod(A[:r]) + C * (1 - k) * math.prod(B[:r])) * tail)
    return math.fsum(terms)


def key_inequality_gap(y: float, xs, ells, k: float) -> float:
    """RHS - y^k for the key inequality; nonnegative whenever the inequality holds."""
    if y < 0:
        raise ValueError("y must be nonnegative")
    return key_inequality_rhs(y, xs, ells, k) - y**k


def key_inequality_suite(trials: int = 10_000, seed: int = 0, tol: float = -1e-10) -> tuple[int, list]:
    rng = np.random.default_rng(seed)
    failures = []
    for _ in range(trials):
        R = int(rng.integers(1, 5))
        y = float(rng.uniform(0, 1e3))
        xs = rng.uniform(-20, 20, size=R).tolist()
        ells = (2 * rng.integers(1, 7, size=R)).tolist()
        k = float(rng.uniform(0, 1))
        gap = key_inequality_gap(y, xs, ells, k)
        rel = gap / max(1.0, y**k)
        if rel < tol:
            failures.append(InequalityFailure("key_inequality", {"y": y, "xs": xs, "ells": ells, "k": k}, rel))
    return trials, failures


# ---------------------------------------------------------------- partitions

@dataclass(frozen=True)
class PrimePartition:
    X: float
    lengths: tuple
    sets: tuple = field(repr=False)
    c: float = 1.0
    threshold: float = 2.0
    fallback: bool = False

    @property
    def R(self) -> int:
        return len(self.lengths)

    @property
    def square_separated(self) -> bool:
        """Whether consecutive lengths satisfy ell_j > ell_{j+1}^2 (diagnostic only)."""
        return all(a > b * b for a, b in zip(self.lengths, self.lengths[1:]))

    def support_exponent(self) -> float:
        return sum(1.0 / ell for ell in self.lengths)


MAX_PRIME_BOUND = 1e9


def length_sequence(X: float, c: float) -> list[int]:
    """Decreasing prefix of ell_1 = 2 ceil(c loglog X), ell_{j+1} = 2 ceil(c log ell_j)."""
    seq = [2 * math.ceil(c * math.log(math.log(X)))]
    while True:
        nxt = 2 * math.ceil(c * math.log(seq[-1]))
        if nxt >= seq[-1] or nxt < 2:
            return seq
        seq.append(nxt)


def build_partition(X: float, c: float = 1.0, threshold: float = 2.0, curve: CurveModel | None = None,
                    cuts=None, lengths=None) -> PrimePartition:
    """Prime sets P_j and even lengths ell_j.

    With ``cuts`` (increasing prime bounds) and ``lengths`` the caller fixes the
    partition directly. Otherwise the recursion runs; if it yields nothing usable
    the result is the single set of primes up to X^(1/ell_1^2).
    """
    if X < 16:
        raise ValueError("X must be at least 16")
    curve = curve or default_curve()
    excluded = set(curve.N0_primes)

    def primes_in(lo, hi):
        if hi > MAX_PRIME_BOUND:
            raise ValueError(f"prime bound {hi:.3g} too large to enumerate (limit {MAX_PRIME_BOUND:.0e})")
        ps = primes_upto(int(math.floor(hi)))
        ps = ps[ps > lo]
        return np.array([p for p in ps.tolist() if p not in excluded], dtype=np.int64)

    if cuts is not None:
        if lengths is None or len(lengths) != len(cuts):
            raise ValueError("cuts need matching lengths")
        if any(ell <= 0 or ell % 2 for ell in lengths):
            raise ValueError("lengths must be positive even integers")
        bounds = [0, *cuts]
        sets = tuple(primes_in(a, b) for a, b in zip(bounds, bounds[1:]))
        return PrimePartition(X, tuple(int(v) for v in lengths), sets, c, threshold, False)

    seq = length_sequence(X, c)
    chosen = [ell for ell in seq if ell > threshold]
    nxt = 2 * math.ceil(c * math.log(seq[0]))
    if not chosen or (len(seq) == 1 and nxt >= seq[0]):
        ell1 = seq[0]
        return PrimePartition(X, (ell1,), (primes_in(0, X ** (1.0 / ell1**2)),), c, threshold, True)
    sets, lo = [], 0.0
    for ell in chosen:
        hi = X ** (1.0 / ell**2)
        sets.append(primes_in(lo, hi))
        lo = hi
    return PrimePartition(X, tuple(chosen), tuple(sets), c, threshold, False)


# ---------------------------------------------------------------- Dirichlet polynomials

def prime_sum(primes, traces, chis) -> float:
    """sum over the given primes of a(p) chi_d(p) / sqrt(p), where a(p) / sqrt(p) = A(p) / p."""
    primes = np.asarray(primes, dtype=np.float64)
    if primes.size == 0:
        return 0.0
    return float(np.sum(np.asarray(traces, dtype=np.float64) / primes * np.asarray(chis, dtype=np.float64)))


def _check_k(k):
    if not 0 <= k <= 1:
        raise ValueError("k must lie in [0, 1]")


def A_factor(P_value: float, ell: int, k: float) -> float:
    _check_k(k)
    return truncated_exp(ell, (k - 1) * P_value)


def B_factor(P_value: float, ell: int, k: float) -> float:
    _check_k(k)
    return truncated_exp(ell, k * P_value)


@dataclass(frozen=True)
class MultiplicativeWeight:
    """Completely multiplicative extension of a(p) on the primes of a partition, plus w and Omega."""

    a_at: dict  # prime -> a(p) (normalised)

    def a_tilde(self, n: int) -> float:
        return math.prod(self.a_at[p] ** e for p, e in factorize(n).items()) if n > 1 else 1.0

    @staticmethod
    def w(n: int) -> int:
        return math.prod(math.factorial(e) for e in factorize(n).values()) if n > 1 else 1

    @staticmethod
    def omega(n: int) -> int:
        return sum(factorize(n).values()) if n > 1 else 0

    def b_flag(self, n: int, primes, ell: int) -> bool:
        f = factorize(n) if n > 1 else {}
        return all(p in primes for p in f) and sum(f.values()) <= ell

    def p_flag(self, n: int, primes, ell: int) -> bool:
        f = factorize(n) if n > 1 else {}
        return all(p in primes for p in f) and sum(f.values()) == ell


def expand_truncated_exp(primes, a_at: dict, ell: int, scale: float) -> dict[int, float]:
    """Coefficients c(n) with E_ell(scale * P(d)) = sum_n c(n) chi_d(n), P(d) = sum a(p) chi_d(p)/sqrt(p).

    c(n) = scale^Omega(n) a~(n) / (w(n) sqrt(n)) over n built from at most ell of the primes.
    """
    primes = sorted(int(p) for p in primes)
    out = {1: 1.0}

    def grow(start, n, omega, coeff, exps_fact):
        for i in range(start, len(primes)):
            p = primes[i]
            m, e, c = n, 0, coeff
            while omega + e < ell:
                m *= p
                e += 1
                c *= scale * a_at[p] / math.sqrt(p)
                weight = exps_fact * math.factorial(e)
                out[m] = c / weight
                grow(i + 1, m, omega + e, c, weight)

    grow(0, 1, 0, 1.0, 1)
    return out


def multiply_expansions(f: dict, g: dict) -> dict:
    out: dict[int, float] = {}
    for n, a in f.items():
        for m, b in g.items():
            out[n * m] = out.get(n * m, 0.0) + a * b
    return out
