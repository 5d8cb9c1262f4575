"""Quadratic Gauss-type sums G_k(n), tau_k(n) and a numerical Poisson-summation check."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .arith import euler_phi, factorize, jacobi, legendre_table


def _require_odd(n: int) -> None:
    if n < 1 or n % 2 == 0:
        raise ValueError("n must be odd")


def _p_adic_valuation(k: int, p: int) -> float:
    if k == 0:
        return math.inf
    v = 0
    while k % p == 0:
        k //= p
        v += 1
    return v


@dataclass(frozen=True)
class GaussValue:
    """Exact real value coeff * sqrt(radicand), radicand squarefree and odd."""

    n: int
    k: int
    coeff: int
    radicand: int = 1

    @property
    def value(self) -> complex:
        return complex(self.coeff * math.sqrt(self.radicand))

    def __complex__(self) -> complex:
        return self.value

    def close_to(self, z: complex, tol: float = 1e-10) -> bool:
        return abs(self.value - z) <= tol


def _prime_power_G(k: int, p: int, beta: int) -> tuple[int, int]:
    alpha = _p_adic_valuation(k, p)
    if beta <= alpha:
        return (euler_phi(p**beta), 1) if beta % 2 == 0 else (0, 1)
    if beta == alpha + 1:
        pa = p ** int(alpha)
        if beta % 2 == 0:
            return -pa, 1
        return jacobi(k // pa, p) * pa, p
    return 0, 1


def gauss_G_exact(k: int, n: int) -> GaussValue:
    _require_odd(n)
    coeff, rad = 1, 1
    for p, beta in factorize(n).items() if n > 1 else ():
        c, r = _prime_power_G(k, p, beta)
        coeff *= c
        rad *= r
        if coeff == 0:
            return GaussValue(n, k, 0, 1)
    return GaussValue(n, k, coeff, rad)


def gauss_G_closed(k: int, n: int) -> complex:
    """G_k(n) from the prime-power table, multiplied over n's factorisation."""
    return gauss_G_exact(k, n).value


def jacobi_table(n: int) -> np.ndarray:
    """t[a] = (a/n) for 0 <= a < n, n odd."""
    _require_odd(n)
    out = np.ones(n, dtype=np.int64)
    if n == 1:
        return out
    a = np.arange(n)
    for p, e in factorize(n).items():
        out *= legendre_table(p)[a % p].astype(np.int64) ** e
    return out


def _G_prefactor(n: int) -> complex:
    return (1 - 1j) / 2 + jacobi(-1, n) * (1 + 1j) / 2


def _tau_prefactor(n: int) -> complex:
    return (1 + 1j) / 2 + jacobi(-1, n) * (1 - 1j) / 2


def character_sums(ks, n: int) -> np.ndarray:
    """sum_a (a/n) e(a k / n) for each k, by literal summation with reduction of a*k mod n."""
    _require_odd(n)
    ks = np.asarray(ks, dtype=np.int64)
    chi = jacobi_table(n).astype(np.float64)
    roots = np.exp(2j * np.pi * np.arange(n) / n)
    a = np.arange(n, dtype=np.int64)
    phases = roots[np.mod(np.outer(ks, a), n)]
    return phases @ chi


def gauss_G_bruteforce(k: int, n: int) -> complex:
    return complex(_G_prefactor(n) * character_sums([k], n)[0])


def gauss_G_bruteforce_many(ks, n: int) -> np.ndarray:
    return _G_prefactor(n) * character_sums(ks, n)


def tau(k: int, n: int) -> complex:
    _require_odd(n)
    return _tau_prefactor(n) * gauss_G_closed(k, n)


def tau_bruteforce(k: int, n: int) -> complex:
    return complex(character_sums([k], n)[0])


class GaussianBump:
    """F(x) = exp(-pi ((x - center)/width)^2) with its Fourier transform in closed form."""

    def __init__(self, center: float, width: float):
        self.center = float(center)
        self.width = float(width)

    def __call__(self, x):
        return np.exp(-np.pi * ((np.asarray(x, dtype=np.float64) - self.center) / self.width) ** 2)

    def fourier(self, xi):
        """hat F(xi) = int F(x) e(-x xi) dx."""
        xi = np.asarray(xi, dtype=np.float64)
        return self.width * np.exp(-np.pi * (self.width * xi) ** 2) * np.exp(-2j * np.pi * self.center * xi)

    def support_window(self, cut: float = 12.0):
        return self.center - cut * self.width, self.center + cut * self.width


def poisson_sides(F: GaussianBump, r: int, q: int, n: int, K: int):
    """(LHS, RHS truncated at |k| <= K) of the twisted Poisson identity."""
    _require_odd(n)
    if q < 1:
        raise ValueError("q must be positive")
    if math.gcd(n, q) != 1:
        raise ValueError("gcd(n, q) must be 1")
    lo, hi = F.support_window()
    d0 = r % q + q * math.floor((lo - r % q) / q)
    ds = np.arange(d0, hi + q, q, dtype=np.int64)
    chi = jacobi_table(n)[np.mod(ds, n)]
    lhs = math.fsum((chi * F(ds)).tolist())

    ks = np.arange(-K, K + 1, dtype=np.int64)
    n_bar = pow(n, -1, q) if q > 1 else 0
    taus = _tau_prefactor(n) * np.array([gauss_G_closed(int(k), n) for k in ks])
    twist = np.exp(2j * np.pi * np.mod(ks * r * n_bar, q) / q)
    terms = F.fourier(ks / (n * q)) * twist * taus
    rhs = jacobi(q, n) / (q * n) * complex(math.fsum(terms.real.tolist()), math.fsum(terms.imag.tolist()))
    return lhs, rhs


def poisson_identity_residual(F: GaussianBump, r: int, q: int, n: int, K: int) -> float:
    lhs, rhs = poisson_sides(F, r, q, n, K)
    return abs(lhs - rhs)


def poisson_tail_bound(F: GaussianBump, q: int, n: int, K: int, terms: int = 4000) -> float:
    """Majorant for |LHS - RHS_K| using |tau_k(n)| <= n."""
    k = np.arange(K + 1, K + 1 + terms, dtype=np.float64)
    return 2.0 / q * float(np.sum(np.abs(F.fourier(k / (n * q)))))


def default_bump(r: int, q: int, n: int, K: int = 64) -> GaussianBump:
    """Gaussian whose transform at k/(nq) is negligible beyond |k| = K.

    Centred just past a member of the progression with nonzero character so the
    twisted sum is not trivially small.
    """
    width = max(3.0 * n * q / K, 1.0)
    d = r % q
    while math.gcd(d, n) != 1:
        d += q
    return GaussianBump(center=d + 0.3 * width, width=width)


def unit_root(x: float) -> complex:
    """e(x) with the argument reduced mod 1 first."""
    return cmath.exp(2j * math.pi * (x - math.floor(x)))
