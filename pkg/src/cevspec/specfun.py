"""Special-function kernel.

Log-gamma with sign, generalized Laguerre polynomials, Kummer Phi = M(L, b, y),
Tricomi Psi = U(L, b, y) with derivatives, and the Weyl function m_a.

Routing for Psi (values at y > 0):

* L a non-positive integer, or L - b + 1 one: exact Laguerre polynomial form.
* large y: asymptotic series when its smallest term is below double precision.
* L > 0: the Laplace integral, by fixed generalized Gauss-Laguerre where that
  rule is accurate (y >= PSI_SEAM, L <= GL_MAX_LAMBDA) and by adaptive
  quadrature in log t elsewhere.
* L <= 0: downward three-term recurrence in L seeded by two values above 0.
  The recurrence runs toward the minimal direction of U and loses nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize
from scipy import special as sc

from cevspec.errors import (
    ArgumentZero,
    NoConvergence,
    ParameterPole,
    PoleAtNonPositiveInteger,
)

PSI_SEAM = 1.5
GL_NODES = 128
GL_MAX_LAMBDA = 8.0
# below this the t^{L-1} tail defeats both integral routes; recur down from L+1
PSI_RECUR_BELOW = 1e-3
_MAX_TERMS = 5000


@dataclass(frozen=True)
class KummerParams:
    Lambda: float
    b: float
    y: float


def _is_nonpos_int(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


def log_gamma(x: float) -> tuple[float, int]:
    """(ln|Gamma(x)|, sign Gamma(x))."""
    x = float(x)
    if _is_nonpos_int(x):
        raise PoleAtNonPositiveInteger(f"Gamma has a pole at {x}", argument="x")
    return math.lgamma(x), int(sc.gammasgn(x))


def gamma_ratio(num, den) -> float:
    """prod Gamma(num) / prod Gamma(den) in log space with sign tracking.

    A pole in ``den`` gives 0; a pole in ``num`` raises.
    """
    for v in den:
        if _is_nonpos_int(v):
            return 0.0
    logv, sgn = 0.0, 1
    for v in num:
        lv, s = log_gamma(v)
        logv += lv
        sgn *= s
    for v in den:
        lv, s = log_gamma(v)
        logv -= lv
        sgn *= s
    return sgn * math.exp(logv)


def pochhammer(x: float, n: int) -> float:
    out = 1.0
    for k in range(n):
        out *= x + k
    return out


# ---------------------------------------------------------------- Laguerre

def laguerre_table(nmax: int, a: float, y) -> np.ndarray:
    """Rows L_0^a(y) .. L_nmax^a(y) by the three-term recurrence."""
    y = np.asarray(y, dtype=float)
    out = np.empty((nmax + 1,) + y.shape)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = 1.0 + a - y
    for k in range(1, nmax):
        out[k + 1] = ((2 * k + 1 + a - y) * out[k] - (k + a) * out[k - 1]) / (k + 1)
    return out


def laguerre(n: int, a: float, y):
    if n < 0:
        raise ValueError("n must be >= 0")
    v = laguerre_table(n, a, y)[n]
    return float(v) if np.ndim(v) == 0 else v


def laguerre_deriv(n: int, a: float, y, order: int = 1):
    """d^k/dy^k L_n^a = (-1)^k L_{n-k}^{a+k}."""
    if order > n:
        return 0.0 * np.asarray(y, dtype=float) if np.ndim(y) else 0.0
    return (-1) ** order * laguerre(n - order, a + order, y)


def laguerre_coeffs(n: int, a: float) -> np.ndarray:
    """Power-series coefficients c_k of L_n^a(y) = sum c_k y^k."""
    c = np.empty(n + 1)
    for k in range(n + 1):
        # (-1)^k binom(n+a, n-k) / k!
        c[k] = (-1) ** k * _binom_real(n + a, n - k) / math.factorial(k)
    return c


def _binom_real(x: float, k: int) -> float:
    out = 1.0
    for j in range(k):
        out *= (x - j) / (j + 1)
    return out


# ------------------------------------------------------------------ Phi

def _phi_series(L: float, b: float, y: float) -> float:
    term = 1.0
    total = 1.0
    k = 0
    while True:
        term *= (L + k) / (b + k) * y / (k + 1)
        total += term
        k += 1
        if term == 0.0:
            return total
        if abs(term) < 1e-17 * abs(total) and k > abs(L):
            return total
        if k > _MAX_TERMS:
            raise NoConvergence(f"Phi series did not converge at ({L}, {b}, {y})")


def _asym_sum(p: float, q: float, z: float):
    """sum_k (p)_k (q)_k / k! z^k truncated at its smallest term.

    Returns (sum, size of the first omitted term relative to the sum).
    """
    term = 1.0
    total = 1.0
    k = 0
    while k < 400:
        nxt = term * (p + k) * (q + k) / (k + 1) * z
        if nxt == 0.0:
            return total, 0.0
        if abs(nxt) >= abs(term) and k > 0:
            return total, abs(nxt / total)
        term = nxt
        total += term
        k += 1
        if abs(term) < 1e-17 * abs(total):
            return total, abs(term / total)
    return total, abs(term / total)


def phi_switch(L: float, b: float) -> float:
    return max(30.0, 2.0 * abs(L) + abs(b))


def _phi_asym(L: float, b: float, y: float):
    dom, e1 = _asym_sum(b - L, 1.0 - L, 1.0 / y)
    val = gamma_ratio([b], [L]) * math.exp(y) * y ** (L - b) * dom
    sub, e2 = _asym_sum(L, L - b + 1.0, -1.0 / y)
    val += math.cos(math.pi * L) * gamma_ratio([b], [b - L]) * y ** (-L) * sub
    return val, max(e1, e2)


def _phi_scalar(L: float, b: float, y: float) -> float:
    if _is_nonpos_int(b):
        raise ParameterPole(f"Phi undefined at b = {b}", argument="b")
    if y == 0.0:
        return 1.0
    if _is_nonpos_int(L):
        n = int(-L)
        return math.factorial(n) / pochhammer(b, n) * laguerre(n, b - 1.0, y)
    if y > phi_switch(L, b):
        val, err = _phi_asym(L, b, y)
        if err < 1e-15 and math.isfinite(val):
            return val
    return _phi_series(L, b, y)


def _vectorize(fn, L, b, y):
    if np.ndim(y) == 0:
        return fn(float(L), float(b), float(y))
    ya = np.asarray(y, dtype=float)
    return np.array([fn(float(L), float(b), float(v)) for v in ya.ravel()]).reshape(ya.shape)


def kummer_phi(Lambda, b, y):
    """Phi(L, b, y) = 1F1(L; b; y)."""
    return _vectorize(_phi_scalar, Lambda, b, y)


def kummer_phi_deriv(Lambda, b, y, order: int = 1):
    """d^k Phi / dy^k = (L)_k/(b)_k Phi(L+k, b+k, y)."""
    c = pochhammer(Lambda, order) / pochhammer(b, order)
    if c == 0.0:
        return 0.0 * np.asarray(y, dtype=float) if np.ndim(y) else 0.0
    return c * kummer_phi(Lambda + order, b + order, y)


# ------------------------------------------------------------------ Psi

@lru_cache(maxsize=512)
def _gl_rule(alpha: float, n: int = GL_NODES):
    return sc.roots_genlaguerre(n, alpha)


def _psi_integral(L: float, b: float, y: float) -> float:
    # U = 1/Gamma(L) int_0^inf e^{-yt} t^{L-1} (1+t)^{b-L-1} dt, with s = y t
    s, w = _gl_rule(L - 1.0)
    f = (1.0 + s / y) ** (b - L - 1.0)
    return y ** (-L) * float(np.dot(w, f)) * sc.rgamma(L)


def _psi_laplace(L: float, b: float, y: float) -> float:
    # same integral with t = e^u, rescaled by its peak value
    c = b - L - 1.0

    def g(u):
        if u > 700.0:
            return -math.inf
        return -y * math.exp(u) + L * u + c * math.log1p(math.exp(u))

    def dg(u):
        return -y * math.exp(u) + L + c * sc.expit(u)

    hi = 60.0 + math.log(abs(L) + abs(c) + 1.0) - math.log(y)
    u0 = optimize.brentq(dg, -60.0, hi) if dg(-60.0) > 0 else -60.0
    g0 = g(u0)

    def f(u):
        return math.exp(g(u) - g0)

    v1, _ = integrate.quad(f, -np.inf, u0, epsabs=0.0, epsrel=1e-13, limit=200)
    v2, _ = integrate.quad(f, u0, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    return sc.gammasgn(L) * math.exp(g0 + math.log(v1 + v2) - math.lgamma(L))


def _psi_positive(L: float, b: float, y: float) -> float:
    if y >= PSI_SEAM and L <= GL_MAX_LAMBDA:
        return _psi_integral(L, b, y)
    return _psi_laplace(L, b, y)


def _psi_recurrence(L: float, b: float, y: float) -> float:
    # U(c-1) = -(b - 2c - y) U(c) - c (c - b + 1) U(c+1), started above 0
    N = int(math.floor(-L)) + 1 if L <= 0 else 1
    c = L + N
    u1 = _psi_positive(c + 1.0, b, y)
    u0 = _psi_positive(c, b, y)
    for _ in range(N):
        um = -(b - 2.0 * c - y) * u0 - c * (c - b + 1.0) * u1
        u1, u0 = u0, um
        c -= 1.0
    return u0


def _psi_scalar(L: float, b: float, y: float) -> float:
    if y < 0:
        raise ValueError("Psi requires y >= 0")
    if y == 0.0:
        if b >= 1.0:
            raise ArgumentZero(f"Psi({L}, {b}, 0) is singular for b >= 1")
        return gamma_ratio([1.0 - b], [L - b + 1.0])
    if _is_nonpos_int(L):
        n = int(-L)
        return (-1) ** n * math.factorial(n) * laguerre(n, b - 1.0, y)
    if _is_nonpos_int(L - b + 1.0):
        m = int(-(L - b + 1.0))
        return y ** (1.0 - b) * (-1) ** m * math.factorial(m) * laguerre(m, 1.0 - b, y)
    if y > phi_switch(L, b):
        s, err = _asym_sum(L, L - b + 1.0, -1.0 / y)
        if err < 1e-15:
            return y ** (-L) * s
    if L >= PSI_RECUR_BELOW:
        return _psi_positive(L, b, y)
    return _psi_recurrence(L, b, y)


def tricomi_psi(Lambda, b, y):
    """Psi(L, b, y) = U(L, b, y)."""
    return _vectorize(_psi_scalar, Lambda, b, y)


def tricomi_psi_deriv(Lambda, b, y, order: int = 1):
    """d^k Psi / dy^k = (-1)^k (L)_k Psi(L+k, b+k, y)."""
    c = (-1) ** order * pochhammer(Lambda, order)
    if c == 0.0:
        return 0.0 * np.asarray(y, dtype=float) if np.ndim(y) else 0.0
    return c * tricomi_psi(Lambda + order, b + order, y)


def tricomi_psi_small_y(Lambda: float, a: float, y: float) -> float:
    """Leading small-y form of Psi(L, 1+a, y).

    Corrected against the usual table at a = 0 (constant term kept) and
    a = -1 (Psi(L, 0, y) = y Psi(L+1, 2, y) gives 1/Gamma(L+1)).
    """
    if a > 0:
        return y ** (-a) * gamma_ratio([a], [Lambda])
    if a == 0:
        return -(math.log(y) + sc.digamma(Lambda) + 2.0 * np.euler_gamma) * sc.rgamma(Lambda)
    if a == -1:
        return float(sc.rgamma(Lambda + 1.0))
    return gamma_ratio([-a], [Lambda - a])


# ------------------------------------------------------------------ Weyl

def weyl_m(a: float, Lambda: float) -> float:
    """m_a(L) = -Gamma(L) Gamma(-a) / (Gamma(L - a) Gamma(1 + a))."""
    for name, v in (("Lambda", Lambda), ("Lambda-a", Lambda - a),
                    ("1+a", 1.0 + a), ("-a", -a)):
        if _is_nonpos_int(v):
            raise ParameterPole(f"Gamma pole in m_a at {name} = {v}", argument=name)
    return -gamma_ratio([Lambda, -a], [Lambda - a, 1.0 + a])
