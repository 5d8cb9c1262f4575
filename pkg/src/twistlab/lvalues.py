"""Central values L(1/2, E_d) from the smoothed approximate functional equation."""

from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit
from scipy import integrate

from .arith import is_squarefree, kronecker
from .cache import atomic_write_bytes, cache_dir
from .coefficients import CoefficientTable, coefficient_table
from .curve import CurveModel
from .discriminants import TwistClass, character_table, enumerate_class

log = logging.getLogger(__name__)

DEFAULT_EPS = 1e-8
NONNEG_TOL = 1e-6


class OddFunctionalEquation(ValueError):
    pass


class TableTooSmall(ValueError):
    def __init__(self, required: int, available: int):
        super().__init__(f"coefficient table too small: need n_max={required}, have {available}")
        self.required = required


# ---------------------------------------------------------------- smooth cutoff

def _smoothstep(t, shape):
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        g0 = np.where(t > 0, np.exp(-shape / np.where(t > 0, t, 1.0)), 0.0)
        g1 = np.where(t < 1, np.exp(-shape / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return g0 / (g0 + g1)


@dataclass(frozen=True)
class SmoothCutoff:
    """Bump equal to 1 on [1, 2], vanishing outside [1/2, 5/2], built from exp(-shape/t)."""

    shape: float = 1.0

    def __post_init__(self):
        if self.shape <= 0:
            raise ValueError("shape must be positive")

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        rise = _smoothstep((x - 0.5) * 2.0, self.shape)
        fall = _smoothstep((2.5 - x) * 2.0, self.shape)
        out = np.where(x < 1.0, rise, np.where(x > 2.0, fall, 1.0))
        return out if out.ndim else float(out)

    def mellin(self, s: complex) -> complex:
        return phi_mellin(s, self)

    @property
    def mass(self) -> float:
        # the two transition pieces are mirror images summing to one plateau half
        return 1.5


def _mellin_quad(phi, s: complex, a: float, b: float) -> complex:
    def re(x):
        return float(phi(x)) * (x ** s).real

    def im(x):
        return float(phi(x)) * (x ** s).imag

    opts = dict(epsabs=1e-13, epsrel=1e-12, limit=200)
    return complex(integrate.quad(re, a, b, **opts)[0], integrate.quad(im, a, b, **opts)[0])


def phi_mellin(s: complex, phi: SmoothCutoff | None = None) -> complex:
    """int_0^inf Phi(x) x^s dx by adaptive quadrature over the support pieces."""
    phi = phi or SmoothCutoff()
    s = complex(s)
    total = _mellin_quad(phi, s, 0.5, 1.0) + _mellin_quad(phi, s, 2.0, 2.5)
    if s == -1:
        total += math.log(2.0)
    else:
        total += (2.0 ** (s + 1) - 1.0) / (s + 1)
    return total


def phi_mellin_gauss_legendre(s: complex, phi: SmoothCutoff | None = None, nodes: int = 64, panels: int = 8) -> complex:
    """Composite Gauss-Legendre evaluation of the same integral; an independent grid."""
    phi = phi or SmoothCutoff()
    x, w = np.polynomial.legendre.leggauss(nodes)
    total = 0j
    edges = np.linspace(0.5, 2.5, 4 * panels + 1)
    for a, b in zip(edges[:-1], edges[1:]):
        xs = 0.5 * (b - a) * x + 0.5 * (a + b)
        total += 0.5 * (b - a) * np.sum(w * phi(xs) * xs ** complex(s))
    return complex(total)


# ---------------------------------------------------------------- class kernel

def _local_power_coeffs(A_p: int, p: int, bad: bool, k_max: int) -> list[int]:
    out = [1, A_p]
    for k in range(2, k_max + 1):
        out.append(A_p * out[-1] if bad else A_p * out[-1] - p * out[-2])
    return out


@dataclass
class CutoffKernel:
    """Class-dependent pieces of the AFE: L_a(s) and the cutoff W(xi).

    chi_d(p) for p | N0 is fixed by the class, so everything here depends only
    on (curve, class).
    """

    cls: TwistClass
    eps: float = DEFAULT_EPS
    xi_min: float = 1e-7
    _smooth: tuple = field(default=None, repr=False)

    def __post_init__(self):
        self.curve = self.cls.curve
        self.sqrtN = math.sqrt(self.curve.N)
        self.local = {}
        for p in self.curve.N0_primes:
            if p not in self.curve.bad_prime_traces:
                raise ValueError(f"missing trace for prime {p} dividing N0")
            self.local[p] = (self.curve.bad_prime_traces[p], self.curve.N % p == 0, self.cls.chi_at(p))
        self._smooth = self._smooth_terms(self.xi_min)

    def _smooth_terms(self, xi_min):
        """N0-smooth m with coefficient a(m) chi(m)/sqrt(m), m up to the W cutoff at xi_min."""
        m_cap = self.sqrtN / (2 * math.pi * xi_min) * (math.log(1 / self.eps) + 20.0)
        ms, cs = [1], [1.0]
        for p, (A_p, bad, chi_p) in self.local.items():
            k_max = int(math.log(m_cap) / math.log(p)) + 1
            loc = _local_power_coeffs(A_p, p, bad, k_max)
            new_ms, new_cs = [], []
            for m, c in zip(ms, cs):
                pk = 1
                for k in range(k_max + 1):
                    if m * pk > m_cap:
                        break
                    val = loc[k] * chi_p**k
                    if val != 0:
                        new_ms.append(m * pk)
                        new_cs.append(c * val / pk)  # a(p^k) / sqrt(p^k) = A(p^k) / p^k
                    pk *= p
            ms, cs = new_ms, new_cs
        order = np.argsort(ms)
        return (np.asarray(ms, dtype=np.float64)[order], np.asarray(cs, dtype=np.float64)[order])

    def L_a(self, s: complex) -> complex:
        """Euler product over p | N0 with chi_d(p) taken from the class."""
        s = complex(s)
        if s.real <= 0:
            raise ValueError("outside convergence region: Re(s) must be positive")
        val = 1.0 + 0j
        for p, (A_p, bad, chi_p) in self.local.items():
            x = p ** (-s)
            ap = A_p / math.sqrt(p)
            val /= (1 - ap * chi_p * x) if bad else (1 - ap * chi_p * x + x * x)
        return val

    def L_a_series(self, s: complex, tol: float = 1e-14) -> complex:
        """The same value by summing the N0-smooth Dirichlet series directly."""
        s = complex(s)
        terms = [(1, 1.0 + 0j)]
        for p, (A_p, bad, chi_p) in self.local.items():
            sigma = s.real
            # |a(p^k)| <= k+1 so stop once (k+1) p^{-k sigma} is below tol
            k_max = 1
            while (k_max + 2) * p ** (-(k_max + 1) * sigma) > tol * (1 - p ** (-sigma)) ** 2 and k_max < 4000:
                k_max += 1
            loc = _local_power_coeffs(A_p, p, bad, k_max)
            new = []
            for n, c in terms:
                for k in range(k_max + 1):
                    coeff = loc[k] * chi_p**k / p ** (k / 2)
                    if coeff:
                        new.append((n * p**k, c * coeff * p ** (-k * s)))
            terms = new
        return complex(math.fsum(t[1].real for t in terms), math.fsum(t[1].imag for t in terms))

    def W(self, xi: float) -> float:
        if xi <= 0:
            raise ValueError("xi must be positive")
        ms, cs = self._smooth
        if xi < self.xi_min:
            self._smooth = ms, cs = self._smooth_terms(xi)
            self.xi_min = xi
        return float(np.sum(cs * np.exp(-2 * math.pi * xi * ms / self.sqrtN)))

    def W_contour(self, xi: float, c: float = 1.0, t_max: float = 80.0) -> float:
        """W(xi) from its Mellin-Barnes integral along Re s = c (mpmath quadrature)."""
        import mpmath as mp

        y = mp.mpf(self.sqrtN) / (2 * mp.pi * xi)
        local = self.local

        def La(z):
            v = mp.mpf(1)
            for p, (A_p, bad, chi_p) in local.items():
                x = mp.power(p, -z)
                ap = A_p / mp.sqrt(p)
                v /= (1 - ap * chi_p * x) if bad else (1 - ap * chi_p * x + x * x)
            return v

        def integrand(t):
            z = mp.mpc(c, t)
            return La(z + mp.mpf(0.5)) * mp.gamma(z) * mp.power(y, z)

        val = mp.quad(integrand, mp.linspace(-t_max, t_max, 17)) / (2 * mp.pi)
        return float(mp.re(val))

    @property
    def smooth_terms(self):
        return self._smooth


# ---------------------------------------------------------------- central values

def truncation_constant(d: int, eps: float = DEFAULT_EPS) -> float:
    """C with exp(-2 pi C) = eps / (log(3+|d|))^4, so W(n/|d|) is negligible past C |d| sqrt(N)."""
    return (math.log(1.0 / eps) + 4.0 * math.log(math.log(3.0 + abs(d)))) / (2.0 * math.pi)


def required_n_max(curve: CurveModel, d: int, eps: float = DEFAULT_EPS, trunc_scale: float = 1.0) -> int:
    return int(math.ceil(trunc_scale * truncation_constant(d, eps) * abs(d) * math.sqrt(curve.N)))


@njit(cache=True)
def _afe_sum(nz_n, nz_w, chi_tab, absd, n_max, ms, cs, scale):
    total = 0.0
    comp = 0.0
    for i in range(nz_n.shape[0]):
        n = nz_n[i]
        if n > n_max:
            break
        c = chi_tab[n % absd]
        if c == 0:
            continue
        x = scale * n
        w = 0.0
        for j in range(ms.shape[0]):
            e = x * ms[j]
            if e > 745.0:
                break
            w += cs[j] * math.exp(-e)
        term = c * nz_w[i] * w
        # Kahan summation keeps the doubled-truncation comparison meaningful
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return 2.0 * total


def _check_member(cls: TwistClass, d: int) -> None:
    curve = cls.curve
    if d % 4 != 1 or math.gcd(d, 2 * curve.N) != 1 or not is_squarefree(d):
        raise ValueError(f"d={d} is not a fundamental discriminant coprime to 2N")
    if curve.root_number * kronecker(d, -curve.N) != 1:
        raise OddFunctionalEquation(
            f"d={d}: odd functional equation, central value trivially 0, outside family")
    if d * cls.kappa <= 0 or d % cls.N0 != cls.residue:
        raise ValueError(f"d={d} is not in class {cls.label()}")


_KERNELS: dict = {}


def kernel_for(cls: TwistClass, eps: float = DEFAULT_EPS) -> CutoffKernel:
    key = (cls.curve.curve_hash, cls.kappa, cls.residue, eps)
    if key not in _KERNELS:
        _KERNELS[key] = CutoffKernel(cls, eps)
    return _KERNELS[key]


def central_value(d: int, cls: TwistClass, table: CoefficientTable | None = None,
                  eps: float = DEFAULT_EPS, trunc_scale: float = 1.0, return_n_max: bool = False):
    """L(1/2, E_d) by the approximate functional equation.

    The raw value is returned; it is only asserted to be >= -1e-6.
    """
    _check_member(cls, d)
    curve = cls.curve
    n_max = required_n_max(curve, d, eps, trunc_scale)
    if table is None:
        table = coefficient_table(curve, n_max)
    elif table.n_max < n_max:
        raise TableTooSmall(n_max, table.n_max)
    kern = kernel_for(cls, eps)
    nz_n, nz_w = table.coprime_support()
    ms, cs = kern.smooth_terms
    absd = abs(d)
    scale = 2.0 * math.pi / (absd * kern.sqrtN)
    val = _afe_sum(nz_n, nz_w, character_table(d), absd, n_max, ms, cs, scale)
    if val < -NONNEG_TOL:
        raise ArithmeticError(f"negative central value {val} at d={d}")
    return (val, n_max) if return_n_max else val


# ---------------------------------------------------------------- disk memo

class LValueCache:
    """Per-curve memo of central values on disk (single writer, many readers)."""

    def __init__(self, curve: CurveModel, eps: float = DEFAULT_EPS, path: Path | None = None):
        self.curve = curve
        self.eps = eps
        tag = f"{curve.curve_hash:016x}_{-math.log10(eps):.3g}"
        self.path = Path(path) if path else cache_dir() / f"lvalues_{tag}.npz"
        self.values: dict[int, tuple[float, int]] = {}
        self._dirty = False
        self._load()

    def _load(self):
        if not self.path.exists():
            return
        try:
            with np.load(self.path) as z:
                for d, v, n in zip(z["d"].tolist(), z["L"].tolist(), z["n_max"].tolist()):
                    self.values[int(d)] = (float(v), int(n))
        except (OSError, KeyError, ValueError) as exc:
            log.warning("ignoring unreadable L-value cache %s: %s", self.path, exc)

    def get(self, d: int):
        return self.values.get(int(d))

    def put(self, d: int, value: float, n_max: int):
        self.values[int(d)] = (float(value), int(n_max))
        self._dirty = True

    def flush(self):
        if not self._dirty:
            return
        ds = np.array(sorted(self.values), dtype=np.int64)
        L = np.array([self.values[d][0] for d in ds.tolist()], dtype=np.float64)
        n = np.array([self.values[d][1] for d in ds.tolist()], dtype=np.int64)
        buf = io.BytesIO()
        np.savez(buf, d=ds, L=L, n_max=n)
        atomic_write_bytes(self.path, buf.getvalue())
        self._dirty = False


_FORK_CLS = None  # inherited by forked workers; the curve's mapping proxy does not pickle


def _values_worker(args):
    ds, eps = args
    cls = _FORK_CLS
    out = []
    for d in ds:
        out.append(central_value(int(d), cls, eps=eps, return_n_max=True))
    return out


def central_values(cls: TwistClass, ds, eps: float = DEFAULT_EPS, cache: LValueCache | bool | None = True,
                   workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Central values and truncation lengths for many d of one class, memoised on disk."""
    ds = np.asarray(ds, dtype=np.int64)
    if cache is True:
        cache = LValueCache(cls.curve, eps)
    L = np.empty(ds.shape[0], dtype=np.float64)
    nm = np.empty(ds.shape[0], dtype=np.int64)
    todo = []
    for i, d in enumerate(ds.tolist()):
        hit = cache.get(d) if cache else None
        if hit is None:
            todo.append(i)
        else:
            L[i], nm[i] = hit
    if todo:
        need = ds[todo]
        coefficient_table(cls.curve, required_n_max(cls.curve, int(np.abs(need).max()), eps))
        if workers > 1 and len(todo) > 64:
            import multiprocessing as mp
            from concurrent.futures import ProcessPoolExecutor

            chunks = [need[i::workers] for i in range(workers)]
            global _FORK_CLS
            _FORK_CLS = cls
            ctx = mp.get_context("fork")
            with ProcessPoolExecutor(workers, mp_context=ctx) as pool:
                parts = list(pool.map(_values_worker, [(c, eps) for c in chunks]))
            results = [None] * len(todo)
            for w, part in enumerate(parts):
                for j, r in enumerate(part):
                    results[w + j * workers] = r
        else:
            results = [central_value(int(d), cls, eps=eps, return_n_max=True) for d in need.tolist()]
        for i, (v, n) in zip(todo, results):
            L[i], nm[i] = v, n
            if cache:
                cache.put(int(ds[i]), v, n)
        if cache:
            cache.flush()
    return L, nm


@dataclass(frozen=True)
class WeightedValues:
    d: np.ndarray
    L: np.ndarray
    weight: np.ndarray
    n_max: np.ndarray

    def __iter__(self):
        return iter(zip(self.d.tolist(), self.L.tolist(), self.weight.tolist()))

    def __len__(self):
        return int(self.d.shape[0])


def batch_central_values(cls: TwistClass, X: float, phi: SmoothCutoff | None = None,
                         eps: float = DEFAULT_EPS, prime_only: bool = False, workers: int = 1,
                         cache: LValueCache | bool | None = True) -> WeightedValues:
    """(d, L(1/2, E_d), Phi(kappa d / X)) over the class with positive weight."""
    if X < 10:
        raise ValueError("X must be at least 10")
    phi = phi or SmoothCutoff()
    ds = enumerate_class(cls, int(math.floor(2.5 * X)), prime_only, lo=int(math.floor(X / 2))).to_array()
    w = phi(np.abs(ds) / X)
    keep = w > 0
    ds, w = ds[keep], w[keep]
    L, nm = central_values(cls, ds, eps, cache=cache, workers=workers)
    return WeightedValues(ds, L, np.asarray(w, dtype=np.float64), nm)

