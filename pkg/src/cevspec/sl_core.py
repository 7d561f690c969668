"""Sturm-Liouville plumbing: normal form, weights, Wronskian, quadrature and
pointwise application of the CEV forward operator and generator."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy import special as sc

from cevspec.errors import NonConvergent, NonIntegrableCoefficient
from cevspec.params import DerivedParams, ModelParams


@dataclass(frozen=True)
class Jet:
    """Value and first two derivatives of a function at a point (or grid)."""

    v: object
    d1: object
    d2: object = 0.0

    def __mul__(self, other: "Jet") -> "Jet":
        return Jet(
            self.v * other.v,
            self.d1 * other.v + self.v * other.d1,
            self.d2 * other.v + 2 * self.d1 * other.d1 + self.v * other.d2,
        )

    def scale(self, c) -> "Jet":
        return Jet(c * self.v, c * self.d1, c * self.d2)


def power_jet(x, k: float) -> Jet:
    x = np.asarray(x, dtype=float)
    return Jet(x ** k, k * x ** (k - 1), k * (k - 1) * x ** (k - 2))


def exp_jet(x, c: float, k: float) -> Jet:
    """Jet of exp(c x^k)."""
    x = np.asarray(x, dtype=float)
    e = np.exp(c * x ** k)
    g1 = c * k * x ** (k - 1)
    g2 = c * k * (k - 1) * x ** (k - 2)
    return Jet(e, e * g1, e * (g1 * g1 + g2))


def compose_jet(outer: Jet, inner: Jet) -> Jet:
    """Jet of F(u(x)) given outer = (F, F', F'') at u(x) and inner = u."""
    return Jet(outer.v, outer.d1 * inner.d1,
               outer.d2 * inner.d1 ** 2 + outer.d1 * inner.d2)


# ------------------------------------------------------------ normal form

@dataclass(frozen=True)
class CoefficientTriple:
    l0: Callable
    l1: Callable
    l2: Callable


def cev_coefficients(m: ModelParams) -> CoefficientTriple:
    """Coefficients of L_g p = l0 p + l1 p' + l2 p''."""
    g, mu, s2 = m.gamma, m.mu, m.sigma ** 2
    return CoefficientTriple(
        l0=lambda x: 0.5 * s2 * g * (g - 1.0) * np.power(x, g - 2.0) - mu,
        l1=lambda x: s2 * g * np.power(x, g - 1.0) - mu * np.asarray(x),
        l2=lambda x: 0.5 * s2 * np.power(x, g),
    )


@dataclass(frozen=True)
class NormalForm:
    w: Callable
    Q0: Callable
    Q2: Callable
    x_ref: float


def _log_integral(fn, lo: float, hi: float) -> float:
    """int_lo^hi fn(x) dx evaluated in u = ln x."""
    if lo == hi:
        return 0.0
    sgn = 1.0
    if hi < lo:
        lo, hi, sgn = hi, lo, -1.0
    with warnings.catch_warnings():
        # the error estimate is checked below; QUADPACK's own warning is redundant
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(lambda u: fn(math.exp(u)) * math.exp(u),
                                  math.log(lo), math.log(hi),
                                  epsabs=1e-14, epsrel=1e-12, limit=200)
    if not math.isfinite(val) or err > 1e-6 * max(1.0, abs(val)):
        raise NonIntegrableCoefficient(f"l1/l2 not integrable on [{lo}, {hi}]")
    return sgn * val


def normal_form(c: CoefficientTriple, x_ref: float = 1.0) -> NormalForm:
    """w = (1/l2) exp(int_{x_ref}^x l1/l2), Q2 = w l2, Q0 = w l0."""

    def ratio(x):
        return float(c.l1(x)) / float(c.l2(x))

    def expo(x):
        return _log_integral(ratio, x_ref, x)

    def w(x):
        return _map(lambda t: math.exp(expo(t)) / float(c.l2(t)), x)

    def Q2(x):
        return _map(lambda t: math.exp(expo(t)), x)

    def Q0(x):
        return _map(lambda t: math.exp(expo(t)) / float(c.l2(t)) * float(c.l0(t)), x)

    return NormalForm(w=w, Q0=Q0, Q2=Q2, x_ref=x_ref)


def _map(fn, x):
    if np.ndim(x) == 0:
        return fn(float(x))
    xa = np.asarray(x, dtype=float)
    return np.array([fn(float(t)) for t in xa.ravel()]).reshape(xa.shape)


def cev_weight(d: DerivedParams, gamma: float, x):
    """w_g(x) = x^g exp(nu x^(2-g)); at g = 2 the power weight x^q."""
    x = np.asarray(x, dtype=float)
    if gamma == 2.0:
        out = x ** d.require("q")
    else:
        with np.errstate(over="ignore"):
            out = np.exp(gamma * np.log(x) + d.require("nu") * x ** (2.0 - gamma))
    return float(out) if out.ndim == 0 else out


def log_cev_weight(d: DerivedParams, gamma: float, x):
    x = np.asarray(x, dtype=float)
    if gamma == 2.0:
        return d.require("q") * np.log(x)
    return gamma * np.log(x) + d.require("nu") * x ** (2.0 - gamma)


def modified_wronskian(Q2: Callable, f: Jet, g: Jet, x) -> float:
    """Q2(x) (f g' - f' g)(x)."""
    return Q2(x) * (f.v * g.d1 - f.d1 * g.v)


# ------------------------------------------------------------- quadrature

class QuadKind(str, enum.Enum):
    GaussLaguerreGeneralized = "GaussLaguerreGeneralized"
    AdaptiveLogGrid = "AdaptiveLogGrid"


@dataclass(frozen=True)
class QuadratureRule:
    """Either a fixed generalized Gauss-Laguerre rule for int f y^a e^{-y},
    or adaptive quadrature in ln x for plain x-space integrals."""

    kind: QuadKind
    a: float = 0.0
    n: int = 128
    lo: float = 0.0
    hi: float = math.inf
    rtol: float = 1e-10
    tail_cutoff: float = 0.0  # relative weight floor; polynomial integrands need the full tail
    _nodes: tuple = field(default=(), repr=False, compare=False)

    @classmethod
    def gauss_laguerre(cls, a: float, n: int = 128, tail_cutoff: float = 0.0):
        y, w = sc.roots_genlaguerre(n, a)
        y2, w2 = sc.roots_genlaguerre(n - n // 4, a)
        keep = w > tail_cutoff * w.max()
        keep2 = w2 > tail_cutoff * w2.max()
        nodes = (y[keep], w[keep], y2[keep2], w2[keep2])
        return cls(QuadKind.GaussLaguerreGeneralized, a=a, n=n,
                   tail_cutoff=tail_cutoff, _nodes=nodes)

    @classmethod
    def adaptive_log(cls, lo: float = 0.0, hi: float = math.inf, rtol: float = 1e-10):
        return cls(QuadKind.AdaptiveLogGrid, lo=lo, hi=hi, rtol=rtol)

    @property
    def nodes(self):
        return self._nodes[0]

    @property
    def weights(self):
        return self._nodes[1]

    def integrate(self, fn: Callable) -> tuple[float, float]:
        """(estimate, error estimate). Gauss-Laguerre integrates fn against
        y^a e^{-y}; the log grid integrates fn itself over (lo, hi)."""
        if self.kind is QuadKind.GaussLaguerreGeneralized:
            y, w, y2, w2 = self._nodes
            v = float(np.dot(w, fn(y)))
            v2 = float(np.dot(w2, fn(y2)))
            return v, abs(v - v2)
        return _adaptive_log(fn, self.lo, self.hi, self.rtol)


def _adaptive_log(fn, lo, hi, rtol):
    ulo = math.log(lo) if lo > 0 else -745.0
    uhi = math.log(hi) if math.isfinite(hi) else 709.0

    def h(u):
        x = math.exp(u)
        return float(fn(x)) * x

    # decade panels keep QUADPACK from missing narrow features
    edges = np.unique(np.concatenate(([ulo, uhi], np.arange(
        math.ceil(ulo / 2.3) * 2.3, uhi, 2.3))))
    total, err = 0.0, 0.0
    for a_, b_ in zip(edges[:-1], edges[1:]):
        v, e = integrate.quad(h, a_, b_, epsabs=0.0, epsrel=rtol * 0.1, limit=200)
        total += v
        err += e
    if not math.isfinite(total):
        raise NonConvergent("adaptive quadrature returned a non-finite value")
    if err > max(rtol * abs(total), 1e-300) * 1e3:
        raise NonConvergent(f"adaptive quadrature stalled: err {err:.3g} vs value {total:.3g}")
    return total, err


def weighted_inner(f: Callable, g: Callable, w: Optional[Callable],
                   q: QuadratureRule) -> tuple[float, float]:
    """<f, g>_w. For a Gauss-Laguerre rule the weight y^a e^{-y} is built in
    and ``w`` multiplies on top of it (pass None for the bare rule)."""
    if w is None:
        return q.integrate(lambda t: f(t) * g(t))
    return q.integrate(lambda t: f(t) * g(t) * w(t))


# --------------------------------------------------------------- operators

def _jet_at(p, x):
    return p(x) if callable(p) else p


def apply_fp(m: ModelParams, p, x):
    """L_g[p](x) with p a callable returning a Jet (or a Jet at x)."""
    j = _jet_at(p, x)
    x = np.asarray(x, dtype=float)
    g, mu, s2 = m.gamma, m.mu, m.sigma ** 2
    return ((0.5 * s2 * g * (g - 1.0) * x ** (g - 2.0) - mu) * j.v
            + (s2 * g * x ** (g - 1.0) - mu * x) * j.d1
            + 0.5 * s2 * x ** g * j.d2)


def apply_generator(m: ModelParams, f, x, drift_rate: Optional[float] = None):
    """G_g[f](x) = mu x f' + 1/2 sigma^2 x^g f''."""
    j = _jet_at(f, x)
    x = np.asarray(x, dtype=float)
    rate = m.mu if drift_rate is None else drift_rate
    return rate * x * j.d1 + 0.5 * m.sigma ** 2 * x ** m.gamma * j.d2


def fp_scale(m: ModelParams, p, x):
    """Magnitude of the individual terms of L_g[p]; the residual denominator."""
    j = _jet_at(p, x)
    x = np.asarray(x, dtype=float)
    g, mu, s2 = m.gamma, m.mu, m.sigma ** 2
    return (np.abs((0.5 * s2 * g * (g - 1.0) * x ** (g - 2.0)) * j.v) + np.abs(mu * j.v)
            + np.abs(s2 * g * x ** (g - 1.0) * j.d1) + np.abs(mu * x * j.d1)
            + np.abs(0.5 * s2 * x ** g * j.d2))


def cev_normal_form(m: ModelParams, x_ref: float = 1.0) -> NormalForm:
    return normal_form(cev_coefficients(m), x_ref)


__all__ = [
    "CoefficientTriple", "Jet", "NormalForm", "QuadKind", "QuadratureRule",
    "apply_fp", "apply_generator", "cev_coefficients", "cev_normal_form",
    "cev_weight", "compose_jet", "exp_jet", "fp_scale",
    "log_cev_weight", "modified_wronskian", "normal_form", "power_jet",
    "weighted_inner",
]
