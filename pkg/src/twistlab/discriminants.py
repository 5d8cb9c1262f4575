"""Fundamental discriminants in residue classes, quadratic characters and twist signs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .arith import factorize, is_squarefree, jacobi, kronecker, primes_upto
from .curve import CurveModel

__all__ = [
    "TwistClass", "DiscriminantStream", "kronecker", "twist_root_number",
    "admissible_classes", "enumerate_class", "character_table", "class_density",
]

BLOCK = 1 << 20


@dataclass(frozen=True)
class TwistClass:
    """Discriminants d with sign kappa and d = residue (mod N0), all with twist sign +1."""

    curve: CurveModel
    kappa: int
    residue: int

    def __post_init__(self):
        N0 = self.curve.N0
        object.__setattr__(self, "residue", self.residue % N0)
        if self.kappa not in (1, -1):
            raise ValueError("kappa must be +1 or -1")
        if self.residue % 8 not in (1, 5):
            raise ValueError(f"residue {self.residue} is not 1 or 5 mod 8")
        if math.gcd(self.residue, N0) != 1:
            raise ValueError(f"residue {self.residue} is not coprime to N0={N0}")
        if self.root_number != 1:
            raise ValueError(
                f"class ({self.kappa:+d}, {self.residue} mod {N0}) has twist root number -1")

    @property
    def N0(self) -> int:
        return self.curve.N0

    @property
    def representative(self) -> int:
        return self.residue if self.kappa > 0 else self.residue - self.N0

    @property
    def root_number(self) -> int:
        # chi_d(-N) only sees d mod N0 and the sign of d
        return self.curve.root_number * kronecker(self.representative, -self.curve.N)

    def chi_at(self, p: int) -> int:
        """chi_d(p) for a prime p dividing N0; constant over the class."""
        if self.N0 % p:
            raise ValueError(f"{p} does not divide N0")
        return kronecker(self.representative, p)

    def contains(self, d: int) -> bool:
        return (d * self.kappa > 0 and d % self.N0 == self.residue and is_squarefree(d))

    def label(self) -> str:
        return f"{self.kappa:+d},{self.residue}"

    @classmethod
    def parse(cls, curve: CurveModel, text: str) -> "TwistClass":
        k, a = text.split(",")
        return cls(curve, int(k), int(a))


def twist_root_number(curve: CurveModel, d: int) -> int:
    """Sign of the functional equation of E_d: eps * chi_d(-N)."""
    if d % 4 != 1 or math.gcd(d, 2 * curve.N) != 1:
        raise ValueError(f"d={d} must be 1 mod 4 and coprime to 2N")
    if not is_squarefree(d):
        raise ValueError(f"d={d} is not squarefree")
    return curve.root_number * kronecker(d, -curve.N)


def admissible_classes(curve: CurveModel, kappas=(1, -1)) -> list[TwistClass]:
    """All classes (kappa, a mod N0) whose twists have root number +1."""
    out = []
    for kappa in kappas:
        for a in range(1, curve.N0, 2):
            if a % 8 not in (1, 5) or math.gcd(a, curve.N0) != 1:
                continue
            rep = a if kappa > 0 else a - curve.N0
            if curve.root_number * kronecker(rep, -curve.N) == 1:
                out.append(TwistClass(curve, kappa, a))
    return out


def class_density(curve: CurveModel) -> float:
    """Expected number of class members per unit of |d|: (1/N0) prod_{p not | N0} (1 - p^-2)."""
    local = 1.0
    for p in curve.N0_primes:
        local *= 1.0 - 1.0 / p**2
    return (6.0 / math.pi**2) / local / curve.N0


@njit(cache=True)
def _inv_mod(a, m):
    a %= m
    x0, x1, r0, r1 = 0, 1, m, a
    while r1 != 0:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        x0, x1 = x1, x0 - q * x1
    return x0 % m


@njit(cache=True)
def _sieve_progression(r0, step, j_lo, j_hi, primes, prime_only):
    """Mask over j in [j_lo, j_hi) of m = r0 + step*j being squarefree (or prime)."""
    n = j_hi - j_lo
    keep = np.ones(n, dtype=np.bool_)
    for p in primes:
        if step % p == 0:
            continue
        q = p if prime_only else p * p
        j0 = (-r0 % q) * _inv_mod(step, q) % q
        start = j0 + ((j_lo - j0 + q - 1) // q) * q
        for j in range(start - j_lo, n, q):
            if not (prime_only and r0 + step * (j + j_lo) == p):
                keep[j] = False
    if prime_only:
        for j in range(n):
            if r0 + step * (j + j_lo) == 1:
                keep[j] = False
    return keep


@dataclass(frozen=True)
class DiscriminantStream:
    """Members d of a class with kappa*d in (lo, X], produced block by block."""

    cls: TwistClass
    X: int
    prime_only: bool = False
    lo: int = 0

    def blocks(self, block: int = BLOCK):
        if self.X < 1:
            return
        N0 = self.cls.N0
        r0 = (self.cls.kappa * self.cls.residue) % N0  # |d| = r0 + N0 * j
        j_first = max(0, (self.lo - r0) // N0 + 1) if self.lo >= r0 else 0
        j_end = (self.X - r0) // N0 + 1 if self.X >= r0 else 0
        primes = primes_upto(math.isqrt(self.X))
        for j_lo in range(j_first, j_end, block):
            j_hi = min(j_end, j_lo + block)
            keep = _sieve_progression(r0, N0, j_lo, j_hi, primes, self.prime_only)
            m = r0 + N0 * (np.arange(j_lo, j_hi, dtype=np.int64)[keep])
            m = m[m > self.lo]
            if m.size:
                yield self.cls.kappa * m

    def to_array(self) -> np.ndarray:
        parts = list(self.blocks())
        return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)

    def __iter__(self):
        for b in self.blocks():
            yield from (int(d) for d in b)


def enumerate_class(cls: TwistClass, X: int, prime_only: bool = False, lo: int = 0) -> DiscriminantStream:
    if X < 0:
        raise ValueError("X must be nonnegative")
    return DiscriminantStream(cls, int(X), prime_only, int(lo))


@njit(cache=True)
def _legendre_into(out, p):
    m = out.shape[0]
    leg = np.full(p, -1, dtype=np.int8)
    leg[0] = 0
    for r in range(1, (p + 1) // 2):
        leg[r * r % p] = 1
    for r in range(m):
        out[r] *= leg[r % p]


def character_table(d: int) -> np.ndarray:
    """t[r] = chi_d(r) for 0 <= r < |d|, d = 1 mod 4 squarefree (chi_d(n) = (n/|d|))."""
    m = abs(int(d))
    if d % 4 != 1:
        raise ValueError("d must be 1 mod 4")
    out = np.ones(m, dtype=np.int8)
    if m == 1:
        return out
    for p in factorize(m):
        _legendre_into(out, p)
    return out


def chi(d: int, n: int) -> int:
    """chi_d(n) for n >= 1."""
    return kronecker(d, n)


def chi_over_d(ds: np.ndarray, n: int) -> np.ndarray:
    """chi_d(n) for a fixed odd n > 0 across an array of d = 1 mod 4."""
    if n % 2 == 0:
        raise ValueError("n must be odd")
    if n == 1:
        return np.ones(ds.shape[0], dtype=np.int8)
    table = np.array([jacobi(r, n) for r in range(n)], dtype=np.int8)
    return table[np.mod(ds, n)]
