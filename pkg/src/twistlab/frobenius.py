"""Bulk Frobenius traces for good primes, with a binary disk cache.

Small primes use a direct residue scan. Larger primes use baby-step giant-step
on the group of points (and on the quadratic twist when one curve alone does
not pin the group order down); the scan remains as the last resort.
"""

from __future__ import annotations

import logging
import struct
from pathlib import Path

import numpy as np
from numba import njit

from .arith import primes_upto
from .cache import atomic_write_bytes, cache_dir
from .curve import CurveModel

log = logging.getLogger(__name__)

MAGIC = b"TWL1"
SCAN_LIMIT = 1000
INF = -1


@njit(cache=True)
def _powmod(b, e, m):
    r = 1
    b %= m
    while e > 0:
        if e & 1:
            r = r * b % m
        b = b * b % m
        e >>= 1
    return r


@njit(cache=True)
def _inv(a, m):
    a %= m
    x0, x1 = 0, 1
    r0, r1 = m, a
    while r1 != 0:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        x0, x1 = x1, x0 - q * x1
    return x0 % m


@njit(cache=True)
def _sqrt_mod(a, p):
    """Tonelli-Shanks; a must be a nonzero square mod the odd prime p."""
    if p % 4 == 3:
        return _powmod(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while _powmod(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m = s
    c = _powmod(z, q, p)
    t = _powmod(a, q, p)
    r = _powmod(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = c
        for _ in range(m - i - 1):
            b = b * b % p
        m = i
        c = b * b % p
        t = t * c % p
        r = r * b % p
    return r


@njit(cache=True)
def _add(x1, y1, x2, y2, A, p):
    if x1 == INF:
        return x2, y2
    if x2 == INF:
        return x1, y1
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return INF, 0
        lam = (3 * x1 % p * x1 + A) % p * _inv(2 * y1, p) % p
    else:
        lam = (y2 - y1) % p * _inv(x2 - x1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    y3 = (lam * (x1 - x3) - y1) % p
    return x3, y3


@njit(cache=True)
def _mul(k, x, y, A, p):
    rx, ry = INF, 0
    while k > 0:
        if k & 1:
            rx, ry = _add(rx, ry, x, y, A, p)
        x, y = _add(x, y, x, y, A, p)
        k >>= 1
    return rx, ry


@njit(cache=True)
def _isqrt(n):
    r = int(np.sqrt(n))
    while r * r > n:
        r -= 1
    while (r + 1) * (r + 1) <= n:
        r += 1
    return r


@njit(cache=True)
def _find_multiple(x, y, lo, width, A, p):
    """Some k in [lo, lo + width] with k*P = O, or -1."""
    m = _isqrt(width) + 1
    bx = np.empty(m, dtype=np.int64)
    by = np.empty(m, dtype=np.int64)
    cx, cy = INF, 0
    for j in range(m):
        bx[j] = cx
        by[j] = cy
        cx, cy = _add(cx, cy, x, y, A, p)
    order = np.argsort(bx)
    sx = bx[order]
    # step = -m*P; target_g = -(lo*P) - g*m*P
    stx, sty = _mul(m, x, y, A, p)
    if stx != INF:
        sty = (p - sty) % p
    tx, ty = _mul(lo, x, y, A, p)
    if tx != INF:
        ty = (p - ty) % p
    g = 0
    while g * m <= width + m:
        pos = np.searchsorted(sx, tx)
        while pos < m and sx[pos] == tx:
            j = order[pos]
            if by[j] == ty:
                i = g * m + j
            else:
                i = g * m - j
            if 0 <= i <= width:
                return lo + i
            pos += 1
        tx, ty = _add(tx, ty, stx, sty, A, p)
        g += 1
    return -1


@njit(cache=True)
def _point_order(x, y, k, A, p):
    n = k
    q = 2
    rem = k
    while q * q <= rem:
        if rem % q == 0:
            while rem % q == 0:
                rem //= q
            while n % q == 0:
                cx, _ = _mul(n // q, x, y, A, p)
                if cx != INF:
                    break
                n //= q
        q += 1
    if rem > 1:
        cx, _ = _mul(n // rem, x, y, A, p)
        if cx == INF:
            n //= rem
    return n


@njit(cache=True)
def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


@njit(cache=True)
def _group_exponent_part(A, B, p, lo, width, npoints):
    """lcm of point orders on y^2 = x^3 + A x + B, stopping once it exceeds width."""
    L = 1
    used = 0
    x = 0
    while used < npoints and x < p:
        rhs = ((x * x % p + A) % p * x + B) % p
        x += 1
        if rhs == 0 or _powmod(rhs, (p - 1) // 2, p) != 1:
            continue
        y = _sqrt_mod(rhs, p)
        k = _find_multiple(x - 1, y, lo, width, A, p)
        if k < 0:
            return -1
        o = _point_order(x - 1, y, k, A, p)
        L = L // _gcd(L, o) * o
        used += 1
        if L > width:
            break
    return L


@njit(cache=True)
def _scan_trace(a2, a1, a0, p):
    qr = np.zeros(p, dtype=np.int8)
    for r in range(1, p):
        qr[r * r % p] = 1
    s = 0
    for x in range(p):
        v = ((x + a2) % p * x % p + a1) % p * x % p
        v = (v + a0) % p
        if v != 0:
            s += 1 if qr[v] else -1
    return -s


@njit(cache=True)
def _bsgs_trace(a2, a1, a0, p):
    inv3 = _inv(3, p)
    c2 = a2 % p
    c1 = a1 % p
    c0 = a0 % p
    # x -> x - a2/3 removes the quadratic term
    A = (c1 - c2 * c2 % p * inv3) % p
    B = (2 * _powmod(c2, 3, p) % p * _inv(27, p) - c2 * c1 % p * inv3 + c0) % p
    s = _isqrt(4 * p)
    lo = p + 1 - s
    width = 2 * s
    L = _group_exponent_part(A, B, p, lo, width, 12)
    if L > 0:
        first = (lo + L - 1) // L * L
        if first + L > lo + width and first <= lo + width:
            return p + 1 - first
    # quadratic twist by a non-residue g has order p + 1 + t
    g = 2
    while _powmod(g, (p - 1) // 2, p) != p - 1:
        g += 1
    At = A * g % p * g % p
    Bt = B * _powmod(g, 3, p) % p
    Lt = _group_exponent_part(At, Bt, p, lo, width, 12)
    if L > 0 and Lt > 0:
        found = 0
        cand = 0
        for t in range(-s, s + 1):
            if (p + 1 - t) % L == 0 and (p + 1 + t) % Lt == 0:
                found += 1
                cand = t
        if found == 1:
            return cand
    return _scan_trace(a2, a1, a0, p)


@njit(cache=True)
def _traces_for(a2, a1, a0, primes, skip, scan_limit):
    out = np.zeros(primes.shape[0], dtype=np.int64)
    for i in range(primes.shape[0]):
        p = primes[i]
        if skip[i]:
            continue
        if p <= scan_limit:
            out[i] = _scan_trace(a2, a1, a0, p)
        else:
            out[i] = _bsgs_trace(a2, a1, a0, p)
    return out


def scan_traces(curve: CurveModel, primes) -> np.ndarray:
    """Traces by full residue scan; used as the oracle for the fast path."""
    primes = np.asarray(primes, dtype=np.int64)
    skip = np.array([curve.is_bad(int(p)) for p in primes], dtype=np.bool_)
    return _traces_for(curve.a2, curve.a1, curve.a0, primes, skip, np.int64(1) << 62)


def compute_traces(curve: CurveModel, primes) -> np.ndarray:
    """A(p) for each prime; bad primes take their override (0 if absent)."""
    primes = np.asarray(primes, dtype=np.int64)
    skip = np.array([curve.is_bad(int(p)) for p in primes], dtype=np.bool_)
    out = _traces_for(curve.a2, curve.a1, curve.a0, primes, skip, SCAN_LIMIT)
    _apply_overrides(curve, primes, out)
    return out


def _apply_overrides(curve, primes, traces):
    for p, t in curve.bad_prime_traces.items():
        idx = np.searchsorted(primes, p)
        if idx < primes.shape[0] and primes[idx] == p:
            traces[idx] = t


def trace_cache_path(curve: CurveModel) -> Path:
    return cache_dir() / f"traces_{curve.curve_hash:016x}.twl"


def write_trace_file(path, curve: CurveModel, p_max: int, traces: np.ndarray) -> None:
    header = MAGIC + struct.pack("<QQ", curve.curve_hash, p_max)
    atomic_write_bytes(path, header + np.asarray(traces, dtype="<i8").tobytes())


def read_trace_file(path, curve: CurveModel):
    """Returns (p_max, traces) or None when the file is missing or foreign."""
    try:
        raw = Path(path).read_bytes()
    except FileNotFoundError:
        return None
    if len(raw) < 20 or raw[:4] != MAGIC:
        log.warning("ignoring malformed trace cache %s", path)
        return None
    h, p_max = struct.unpack("<QQ", raw[4:20])
    if h != curve.curve_hash:
        return None
    traces = np.frombuffer(raw[20:], dtype="<i8").astype(np.int64)
    if traces.shape[0] != primes_upto(p_max).shape[0]:
        log.warning("trace cache %s has wrong length", path)
        return None
    return int(p_max), traces


def prime_traces(curve: CurveModel, p_max: int, use_cache: bool = True):
    """(primes <= p_max, A(p)) with overrides applied; reads and extends the disk cache."""
    primes = primes_upto(p_max)
    if use_cache:
        path = trace_cache_path(curve)
        hit = read_trace_file(path, curve)
        if hit is not None and hit[0] >= p_max:
            traces = hit[1][: primes.shape[0]].copy()
            _apply_overrides(curve, primes, traces)
            return primes, traces
        if hit is not None:
            start = hit[1].shape[0]
            tail = compute_traces(curve, primes[start:])
            traces = np.concatenate([hit[1], tail])
            _apply_overrides(curve, primes, traces)
        else:
            traces = compute_traces(curve, primes)
        write_trace_file(path, curve, p_max, traces)
        return primes, traces
    return primes, compute_traces(curve, primes)
