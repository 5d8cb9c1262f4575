"""Hecke coefficient tables A(n), a(n) = A(n)/sqrt(n), and the symmetric-square value."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .arith import factorize, primes_upto, smallest_prime_factors
from .curve import CurveModel
from .frobenius import prime_traces


class MissingTraceError(ValueError):
    pass


@njit(cache=True)
def _fill_coefficients(spf, trace_at, bad_mask, n_max):
    A = np.zeros(n_max + 1, dtype=np.int64)
    A[1] = 1
    for n in range(2, n_max + 1):
        p = spf[n]
        m = n
        k = 0
        while m % p == 0:
            m //= p
            k += 1
        if m > 1:
            A[n] = A[n // m] * A[m]
            continue
        # n = p^k
        ap = trace_at[p]
        if k == 1:
            A[n] = ap
        elif bad_mask[p]:
            A[n] = ap * A[n // p]
        else:
            A[n] = ap * A[n // p] - p * A[n // (p * p)]
    return A


@dataclass(frozen=True)
class CoefficientTable:
    """Immutable table of A(n) for n <= n_max."""

    curve: CurveModel
    n_max: int
    A: np.ndarray = field(repr=False)
    trace_at: np.ndarray = field(repr=False)
    spf: np.ndarray = field(repr=False)
    _lazy: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def a(self) -> np.ndarray:
        if "a" not in self._lazy:
            n = np.arange(self.n_max + 1, dtype=np.float64)
            n[0] = 1.0
            arr = self.A / np.sqrt(n)
            arr[0] = 0.0
            arr.flags.writeable = False
            self._lazy["a"] = arr
        return self._lazy["a"]

    def coprime_support(self):
        """(n, a(n)/sqrt(n)) for n coprime to N0 with A(n) != 0, increasing in n.

        The second array is A(n)/n, the weight the central-value sum uses.
        """
        if "nz" not in self._lazy:
            mask = self.A != 0
            for p in self.curve.N0_primes:
                mask[::p] = False
            n = np.flatnonzero(mask).astype(np.int64)
            vals = self.A[n] / n.astype(np.float64)
            n.flags.writeable = False
            vals.flags.writeable = False
            self._lazy["nz"] = (n, vals)
        return self._lazy["nz"]

    def trace(self, p: int) -> int:
        return int(self.trace_at[p])

    def __getitem__(self, n: int) -> int:
        return int(self.A[n])


def build_coefficient_table(curve: CurveModel, n_max: int, use_cache: bool = True) -> CoefficientTable:
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    bad = sorted(set(factorize(curve.N)) | {2} | set(factorize(curve.disc)))
    for p in bad:
        if p <= n_max and p not in curve.bad_prime_traces:
            raise MissingTraceError(
                f"missing trace for bad prime {p}: supply override in bad_prime_traces")
    top = max(n_max, 2)
    primes, traces = prime_traces(curve, top, use_cache=use_cache)
    trace_at = np.zeros(top + 1, dtype=np.int64)
    trace_at[primes] = traces
    bad_mask = np.zeros(top + 1, dtype=np.bool_)
    for p in factorize(curve.N):
        if p <= top:
            bad_mask[p] = True
    spf = smallest_prime_factors(top)
    A = _fill_coefficients(spf, trace_at, bad_mask, top)[: n_max + 1]
    A.flags.writeable = False
    trace_at.flags.writeable = False
    return CoefficientTable(curve, n_max, A, trace_at, spf)


_TABLES: dict = {}


def coefficient_table(curve: CurveModel, n_max: int) -> CoefficientTable:
    """Process-wide memo: returns a table covering at least n_max."""
    key = curve.curve_hash
    tab = _TABLES.get(key)
    if tab is None or tab.n_max < n_max:
        size = n_max if tab is None else max(n_max, int(1.25 * tab.n_max))
        tab = build_coefficient_table(curve, size)
        _TABLES[key] = tab
    return tab


def sym2_local_log(ap_norm: np.ndarray, p: np.ndarray, s: float = 1.0) -> np.ndarray:
    """log of the good-prime local factor of L(s, sym^2 E) given a(p) = A(p)/sqrt(p)."""
    x = p.astype(np.float64) ** (-s)
    return -np.log1p(-x) - np.log1p(-(ap_norm**2 - 2.0) * x + x * x)


def symmetric_square_L(curve: CurveModel, prime_cutoff: int, s: float = 1.0) -> float:
    """Truncated Euler product for L(s, sym^2 E) over p <= prime_cutoff.

    Primes dividing N use (1 - a(p)^2 p^-s)^-1, a fallback rather than the exact
    local factor.
    """
    if prime_cutoff < 2:
        raise ValueError("prime cutoff must be at least 2")
    primes, traces = prime_traces(curve, prime_cutoff)
    ap = traces / np.sqrt(primes.astype(np.float64))
    bad = curve.N % primes == 0
    logs = np.where(bad, 0.0, sym2_local_log(ap, primes, s))
    pb = primes[bad].astype(np.float64)
    logs_bad = -np.log1p(-(ap[bad] ** 2) * pb ** (-s))
    return float(math.exp(math.fsum(logs) + math.fsum(logs_bad)))


def root_number_diagnostic(curve: CurveModel, y: float = 1.25, warn: bool = True) -> dict:
    """Numerical sign of the functional equation from theta(1/y) = eps * y^2 * theta(y).

    theta(y) = sum A(n) exp(-2 pi n y / sqrt(N)).
    """
    sq = math.sqrt(curve.N)
    y_small = min(y, 1.0 / y)
    n_max = int(math.ceil(40.0 * sq / (2 * math.pi * y_small))) + 10
    tab = build_coefficient_table(curve, n_max)
    n = np.arange(1, n_max + 1, dtype=np.float64)
    A = tab.A[1:].astype(np.float64)

    def theta(t):
        return float(np.sum(A * np.exp(-2 * math.pi * n * t / sq)))

    lhs, rhs = theta(1.0 / y), y * y * theta(y)
    ratio = lhs / rhs if rhs != 0 else float("nan")
    sign = 1 if ratio > 0 else -1
    ok = abs(ratio - curve.root_number) < 1e-6
    if warn and not ok:
        warnings.warn(
            f"configured root number {curve.root_number:+d} disagrees with numerical "
            f"functional equation (ratio {ratio:.6g}); check N, eps and bad traces",
            stacklevel=2)
    return {"ratio": ratio, "sign": sign, "consistent": ok}


def divisor_count_table(n_max: int) -> np.ndarray:
    d = np.zeros(n_max + 1, dtype=np.int64)
    for k in range(1, n_max + 1):
        d[k::k] += 1
    return d


def good_primes(curve: CurveModel, upto: int) -> np.ndarray:
    ps = primes_upto(upto)
    return np.array([p for p in ps if not curve.is_bad(int(p))], dtype=np.int64)
