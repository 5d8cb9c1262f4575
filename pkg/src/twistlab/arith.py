"""Elementary arithmetic: sieves, factorisation and quadratic symbols."""

from __future__ import annotations

import math

import numpy as np
from numba import njit


def primes_upto(n: int) -> np.ndarray:
    """All primes p <= n as an int64 array."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    sieve[4::2] = False
    for p in range(3, math.isqrt(n) + 1, 2):
        if sieve[p]:
            sieve[p * p :: 2 * p] = False
    return np.flatnonzero(sieve).astype(np.int64)


@njit(cache=True)
def _spf_fill(spf, primes):
    n = spf.shape[0] - 1
    for p in primes:
        if spf[p] != 0:
            continue
        for m in range(p, n + 1, p):
            if spf[m] == 0:
                spf[m] = p
    return spf


def smallest_prime_factors(n: int) -> np.ndarray:
    """Least-prime-factor table spf[0..n] (spf[0] = spf[1] = 0)."""
    spf = np.zeros(n + 1, dtype=np.int32)
    return _spf_fill(spf, primes_upto(n).astype(np.int32))


def factorize(n: int) -> dict[int, int]:
    """Prime factorisation of a nonzero integer by trial division (sign dropped)."""
    n = abs(int(n))
    if n == 0:
        raise ValueError("cannot factor 0")
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    p, step = 5, 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += step
        step = 6 - step
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_squarefree(n: int) -> bool:
    return n != 0 and all(e == 1 for e in factorize(n).values())


def squarefree_decomposition(u: int) -> tuple[int, int]:
    """Write u = u1 * u2**2 with u1 squarefree; returns (u1, u2)."""
    u1, u2 = 1, 1
    for p, e in factorize(u).items():
        if e % 2:
            u1 *= p
        u2 *= p ** (e // 2)
    return u1, u2


def is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd n > 0."""
    if n <= 0 or n % 2 == 0:
        raise ValueError("n must be an odd positive integer")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def kronecker(d: int, n: int) -> int:
    """Kronecker symbol (d/n) for any integers d and n."""
    if n == 0:
        return 1 if abs(d) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if d < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if d % 2 == 0:
            return 0
        if v % 2 and d % 8 in (3, 5):
            result = -result
    if n == 1:
        return result
    return result * jacobi(d, n)


def legendre_table(p: int) -> np.ndarray:
    """Array t with t[r] = (r/p) for 0 <= r < p, p an odd prime."""
    table = -np.ones(p, dtype=np.int8)
    squares = (np.arange(1, (p + 1) // 2, dtype=np.int64) ** 2) % p
    table[squares] = 1
    table[0] = 0
    return table


def mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def euler_phi(n: int) -> int:
    out = n
    for p in factorize(n):
        out = out // p * (p - 1)
    return out


def smooth_numbers(primes, bound: int) -> list[int]:
    """Sorted list of positive integers <= bound whose prime factors lie in `primes`."""
    out = [1]
    for p in primes:
        extra = []
        for m in out:
            m *= p
            while m <= bound:
                extra.append(m)
                m *= p
        out.extend(extra)
    return sorted(out)


@njit(cache=True)
def jacobi_nb(a, n):
    a = a % n
    result = 1
    while a != 0:
        while a % 2 == 0:
            a //= 2
            r = n % 8
            if r == 3 or r == 5:
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a = a % n
    if n == 1:
        return result
    return 0
