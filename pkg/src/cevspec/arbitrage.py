"""Harmonic function, Doob conditioning, risk premium and regime report."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import special as sc

from cevspec.errors import SingularGamma, WrongRegime
from cevspec.params import Band, ModelParams, classify_regime, derive_params
from cevspec.sl_core import Jet, apply_generator


def _need_sub_two(m: ModelParams):
    if not 0.0 < m.gamma < 2.0:
        raise WrongRegime(f"h_up needs 0 < gamma < 2, got {m.gamma}")


def harmonic_h(m: ModelParams, x):
    """(h, h') with h(x) = int_0^x exp(nu y^(2-g)) dy.

    Closed through t = |nu| y^(2-g):  h = |nu|^-a Gamma(a+1) P(a, |nu| x^(2-g)),
    P the regularized lower incomplete gamma.
    """
    _need_sub_two(m)
    d = derive_params(m)
    nu, a = d.require("nu"), d.require("a")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be >= 0")
    t = abs(nu) * x ** (2.0 - m.gamma)
    h = abs(nu) ** (-a) * math.gamma(a + 1.0) * sc.gammainc(a, t)
    hp = np.exp(-t)
    if h.ndim == 0:
        return float(h), float(hp)
    return h, hp


def harmonic_jet(m: ModelParams, x) -> Jet:
    d = derive_params(m)
    h, hp = harmonic_h(m, x)
    x = np.asarray(x, dtype=float)
    hpp = d.require("nu") * (2.0 - m.gamma) * x ** (1.0 - m.gamma) * hp
    return Jet(h, hp, hpp)


def harmonic_h_quad(m: ModelParams, x: float) -> float:
    """Plain quadrature of the defining integral; independent check of harmonic_h."""
    from scipy import integrate
    _need_sub_two(m)
    nu = derive_params(m).require("nu")
    v, _ = integrate.quad(lambda y: math.exp(nu * y ** (2.0 - m.gamma)), 0.0, x,
                          epsabs=0.0, epsrel=1e-13, limit=200)
    return v


def doob_drift(m: ModelParams, x):
    """Add-on drift sigma^2 x^g h'/h of the conditioned process."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("x must be > 0")
    h, hp = harmonic_h(m, x)
    return m.sigma ** 2 * x ** m.gamma * hp / h


def conditioned_generator_apply(m: ModelParams, f, x):
    """G_up f = 1/2 s^2 x^g f'' + (mu x + add-on) f'. ``f`` is a Jet or x -> Jet."""
    _need_sub_two(m)
    j = f(x) if callable(f) else f
    x = np.asarray(x, dtype=float)
    drift = m.mu * x + doob_drift(m, x)
    return 0.5 * m.sigma ** 2 * x ** m.gamma * j.d2 + drift * j.d1


def doob_transform_apply(m: ModelParams, f, x):
    """h^-1 G_g(h f), the second path to the conditioned generator."""
    _need_sub_two(m)
    j = f(x) if callable(f) else f
    hj = harmonic_jet(m, x)
    return apply_generator(m, hj * j, x) / hj.v


def doob_identity_gap(m: ModelParams, f, x):
    """Pointwise |G_up f - h^-1 G(h f)| over the size of the terms involved."""
    j = f(x) if callable(f) else f
    x = np.asarray(x, dtype=float)
    a = conditioned_generator_apply(m, j, x)
    b = doob_transform_apply(m, j, x)
    scale = (np.abs(0.5 * m.sigma ** 2 * x ** m.gamma * j.d2)
             + np.abs((m.mu * x + doob_drift(m, x)) * j.d1) + 1e-300)
    return np.abs(a - b) / scale


def generator_residual_h(m: ModelParams, x):
    """|G_g h| / (1 + x |h'|)."""
    hj = harmonic_jet(m, x)
    x = np.asarray(x, dtype=float)
    return np.abs(apply_generator(m, hj, x)) / (1.0 + x * np.abs(hj.d1))


# ------------------------------------------------------------ risk premium

def risk_premium(m: ModelParams, x):
    """lambda(x) = ((mu - r)/sigma) x^(1 - g/2)."""
    x = np.asarray(x, dtype=float)
    return (m.mu - m.r) / m.sigma * x ** (1.0 - 0.5 * m.gamma)


def candidate_phi(m: ModelParams, x, strict: bool = False):
    """Solution of d/dx ln phi = (r - mu) x^(1-g) / sigma^2, phi(0+) scale fixed.

    g != 2: exp(k x^(2-g)/(2-g)), k = (r-mu)/sigma^2.
    g = 2: x^k, unless ``strict`` asks for the exponential form only.
    """
    x = np.asarray(x, dtype=float)
    k = (m.r - m.mu) / m.sigma ** 2
    if m.gamma == 2.0:
        if strict:
            raise SingularGamma("exponential form of phi is singular at gamma = 2")
        return x ** k
    return np.exp(k * x ** (2.0 - m.gamma) / (2.0 - m.gamma))


def black_scholes_rho(m: ModelParams) -> float:
    """rho making x^k an exact eigenfunction pair at g = 2."""
    if m.gamma != 2.0:
        raise WrongRegime("the exact (rho, phi) pair is only available at gamma = 2")
    k = (m.r - m.mu) / m.sigma ** 2
    return -m.r - m.mu * k - 0.5 * m.sigma ** 2 * k * (k - 1.0)


@dataclass(frozen=True)
class RiskPremiumSpec:
    lambda_fn: Callable
    phi_fn: Callable
    rho: Optional[float] = None


def risk_premium_spec(m: ModelParams) -> RiskPremiumSpec:
    rho = black_scholes_rho(m) if m.gamma == 2.0 else None
    return RiskPremiumSpec(lambda x: risk_premium(m, x), lambda x: candidate_phi(m, x), rho)


def log_phi_relation_gap(m: ModelParams, x, h: float = 1e-5):
    """Relative gap between a central difference of ln phi and -lambda / (sigma x^(g/2))."""
    x = np.asarray(x, dtype=float)
    step = h * x
    lp = np.log(candidate_phi(m, x + step))
    lm = np.log(candidate_phi(m, x - step))
    fd = (lp - lm) / (2.0 * step)
    target = -risk_premium(m, x) / (m.sigma * x ** (0.5 * m.gamma))
    return np.abs(fd - target) / np.maximum(np.abs(target), 1e-300)


# --------------------------------------------------------------- report

class Mechanism(str, enum.Enum):
    BoundaryConditioningArbitrage = "BoundaryConditioningArbitrage"
    StrictLocalMartingaleBubble = "StrictLocalMartingaleBubble"
    BlackScholesBaseline = "BlackScholesBaseline"


class ForwardMode(str, enum.Enum):
    IntegrableForwardMode = "IntegrableForwardMode"
    GeneralizedBoundaryStateOnly = "GeneralizedBoundaryStateOnly"
    NoPositiveBoundaryState = "NoPositiveBoundaryState"


@dataclass(frozen=True)
class RegimeReport:
    band: Band
    attainable_zero: bool
    mechanism: Mechanism
    forward_mode_visibility: Optional[ForwardMode]
    delta: Optional[float]

    def as_dict(self) -> dict:
        return {
            "band": self.band.value,
            "attainable_zero": self.attainable_zero,
            "mechanism": self.mechanism.value,
            "forward_mode_visibility": (self.forward_mode_visibility.value
                                        if self.forward_mode_visibility else None),
            "delta": self.delta,
        }


def arbitrage_report(m: ModelParams) -> RegimeReport:
    g = m.gamma
    reg = classify_regime(g)
    d = derive_params(m)
    if g == 2.0:
        # no forward-mode statement is made for the Black-Scholes baseline
        return RegimeReport(reg.band, False, Mechanism.BlackScholesBaseline, None, None)
    if g > 2.0:
        return RegimeReport(reg.band, False, Mechanism.StrictLocalMartingaleBubble,
                            ForwardMode.NoPositiveBoundaryState, d.delta)
    mode = ForwardMode.IntegrableForwardMode if g < 1.0 else ForwardMode.GeneralizedBoundaryStateOnly
    return RegimeReport(reg.band, True, Mechanism.BoundaryConditioningArbitrage, mode, d.delta)


__all__ = [
    "ForwardMode", "Mechanism", "RegimeReport", "RiskPremiumSpec",
    "arbitrage_report", "black_scholes_rho", "candidate_phi",
    "conditioned_generator_apply", "doob_drift", "doob_identity_gap",
    "doob_transform_apply", "generator_residual_h", "harmonic_h",
    "harmonic_h_quad", "harmonic_jet", "log_phi_relation_gap",
    "risk_premium", "risk_premium_spec",
]
