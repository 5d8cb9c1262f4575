"""The fixed elliptic curve y^2 = f(x) and its arithmetic invariants."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from .arith import factorize, is_square

LOG2 = math.log(2.0)

# Splitting-field degree -> (mu(E), sigma(E)^2) for the Tate-Shafarevich distribution.
SPLITTING_CONSTANTS = {
    1: (-0.5 - 2.0 * LOG2, 1.0 + 4.0 * LOG2**2),
    2: (-0.5 - 1.5 * LOG2, 1.0 + 2.5 * LOG2**2),
    3: (-0.5 - (2.0 / 3.0) * LOG2, 1.0 + (4.0 / 3.0) * LOG2**2),
    6: (-0.5 - (5.0 / 6.0) * LOG2, 1.0 + (7.0 / 6.0) * LOG2**2),
}


class BadPrimeError(ValueError):
    """Raised when a trace is requested at a prime the point count cannot handle."""


def cubic_discriminant(a2: int, a1: int, a0: int) -> int:
    return (a2 * a2 * a1 * a1 - 4 * a1**3 - 4 * a2**3 * a0 - 27 * a0 * a0
            + 18 * a2 * a1 * a0)


def rational_roots(a2: int, a1: int, a0: int) -> list[int]:
    """Integer roots of the monic cubic x^3 + a2 x^2 + a1 x + a0 (with multiplicity)."""
    f = lambda x: ((x + a2) * x + a1) * x + a0  # noqa: E731
    roots = []
    if a0 == 0:
        roots.append(0)
        # remaining quadratic x^2 + a2 x + a1
        disc = a2 * a2 - 4 * a1
        if disc >= 0 and is_square(disc):
            r = math.isqrt(disc)
            roots += [(-a2 + r) // 2, (-a2 - r) // 2] if (a2 + r) % 2 == 0 else []
        return sorted(roots)
    cands = set()
    for p_exp in _divisors(abs(a0)):
        cands.update((p_exp, -p_exp))
    for c in sorted(cands):
        if f(c) == 0:
            roots.append(c)
    if len(roots) == 1:
        # divide out and test the quadratic for a repeated root
        r0 = roots[0]
        b = a2 + r0
        c = a1 + r0 * b
        disc = b * b - 4 * c
        if disc == 0:
            roots.append(-b // 2)
    return sorted(roots)


def _divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n).items():
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return divs


@dataclass(frozen=True)
class SplittingClass:
    degree: int
    mu: float
    sigma2: float

    def __post_init__(self):
        if SPLITTING_CONSTANTS.get(self.degree) != (self.mu, self.sigma2):
            raise ValueError(f"not a row of the splitting-field table: {self}")


def classify_splitting_field(a2: int, a1: int, a0: int) -> SplittingClass:
    """Degree of the splitting field of f over Q together with (mu, sigma^2)."""
    disc = cubic_discriminant(a2, a1, a0)
    if disc == 0:
        raise ValueError("singular cubic")
    n_roots = len(rational_roots(a2, a1, a0))
    if n_roots == 3:
        degree = 1
    elif n_roots == 1:
        degree = 2
    elif is_square(disc):
        degree = 3
    else:
        degree = 6
    mu, sigma2 = SPLITTING_CONSTANTS[degree]
    return SplittingClass(degree, mu, sigma2)


@dataclass(frozen=True)
class CurveModel:
    """y^2 = x^3 + a2 x^2 + a1 x + a0 with conductor, root number and bad-prime data.

    ``bad_prime_traces`` must hold A(p) for every prime dividing N, for p = 2
    (the model is always singular mod 2) and for any odd prime dividing disc(f)
    where the model is not minimal.
    """

    a2: int
    a1: int
    a0: int
    N: int
    root_number: int = 1
    bad_prime_traces: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(
            self, "bad_prime_traces",
            MappingProxyType({int(p): int(t) for p, t in dict(self.bad_prime_traces).items()}),
        )
        if self.disc == 0:
            raise ValueError("singular cubic: disc(f) = 0")
        if self.N < 1:
            raise ValueError("conductor must be positive")
        if self.root_number not in (1, -1):
            raise ValueError("root number must be +1 or -1")
        for p in factorize(self.disc):
            if p != 2 and self.N % p and p not in self.bad_prime_traces:
                raise ValueError(
                    f"prime {p} divides disc(f) but not N: model not minimal at {p}; "
                    "supply its trace in bad_prime_traces")

    @property
    def disc(self) -> int:
        return cubic_discriminant(self.a2, self.a1, self.a0)

    @property
    def N0(self) -> int:
        return math.lcm(8, self.N)

    @property
    def N0_primes(self) -> list[int]:
        return sorted(factorize(self.N0))

    @property
    def curve_hash(self) -> int:
        key = f"{self.a2},{self.a1},{self.a0},{self.N}".encode()
        return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")

    def is_bad(self, p: int) -> bool:
        """True when A(p) must come from the overrides rather than a point count."""
        return p == 2 or self.N % p == 0 or self.disc % p == 0

    def f_mod(self, x, p):
        return (((x + self.a2) % p * x + self.a1) % p * x + self.a0) % p

    def splitting_class(self) -> SplittingClass:
        return classify_splitting_field(self.a2, self.a1, self.a0)

    def trace_of_frobenius(self, p: int) -> int:
        return trace_of_frobenius(self, p)

    def tamagawa_root_count(self, p: int) -> int:
        return tamagawa_root_count(self, p)

    def describe(self) -> str:
        return (f"y^2 = x^3 + {self.a2}x^2 + {self.a1}x + {self.a0}, N={self.N}, "
                f"eps={self.root_number:+d}")


def default_curve() -> CurveModel:
    """y^2 = x^3 - x (conductor 32, root number +1, additive at 2)."""
    return CurveModel(0, -1, 0, N=32, root_number=1, bad_prime_traces={2: 0})


def trace_of_frobenius(curve: CurveModel, p: int) -> int:
    """A(p) = p + 1 - #E(F_p) by a full scan of the residues mod p."""
    if p == 2 or curve.N % p == 0:
        raise BadPrimeError(f"bad prime {p}: supply override in bad_prime_traces")
    if curve.disc % p == 0:
        raise BadPrimeError(f"prime {p} divides disc(f): supply override in bad_prime_traces")
    x = np.arange(p, dtype=np.int64)
    fx = curve.f_mod(x, p)
    is_qr = np.zeros(p, dtype=bool)
    is_qr[(x * x) % p] = True
    # sum of Legendre symbols of f(x); zero values contribute nothing
    nonzero = fx != 0
    chi_sum = int(np.count_nonzero(is_qr[fx] & nonzero)) - int(np.count_nonzero(~is_qr[fx] & nonzero))
    return -chi_sum


def tamagawa_root_count(curve: CurveModel, p: int) -> int:
    """c(p) = 1 + #{x mod p : f(x) = 0}, for odd p not dividing N disc(f)."""
    if p == 2 or (curve.N * curve.disc) % p == 0:
        raise ValueError(f"excluded prime {p}")
    x = np.arange(p, dtype=np.int64)
    return 1 + int(np.count_nonzero(curve.f_mod(x, p) == 0))
