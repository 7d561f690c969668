"""Monte Carlo estimators built on :func:`simulate`."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from cevspec import arbitrage as arb
from cevspec.errors import ConfigInvalid, MissingIncrements, WrongRegime
from cevspec.mc_sim.config import EstimateCI, Measure, Scheme, SimConfig, mean_ci
from cevspec.mc_sim.engine import exact_gbm_terminal, simulate
from cevspec.params import ModelParams

KS_C_1PCT = 1.628  # asymptotic two-sample KS constant at the 1% level


def martingale_defect(m: ModelParams, cfg: SimConfig, level: float = 0.99) -> EstimateCI:
    """x0 - E[e^{-rT} X_T] under the risk-neutral measure."""
    if cfg.measure is not Measure.RiskNeutral:
        raise ConfigInvalid("martingale_defect needs measure = RiskNeutral")
    ens = simulate(m, cfg)
    samples = m.x0 - math.exp(-m.r * cfg.T) * ens.terminal
    note = f"clamp events {ens.clamp_events}" if m.gamma >= 2.0 else ""
    return mean_ci(samples, level, note)


def absorption_probability(m: ModelParams, cfg: SimConfig, t: float,
                           level: float = 0.99) -> EstimateCI:
    """P(zeta <= t); exactly 0 without sampling when 0 is unattainable."""
    if m.gamma >= 2.0:
        return EstimateCI(0.0, 0.0, level, 0, "0 is unattainable for gamma >= 2")
    ens = simulate(m, cfg.with_(T=t, dt=min(cfg.dt, t)))
    return mean_ci(ens.absorbed.astype(float), level)


def weighted_ks(a: np.ndarray, b: np.ndarray, wb: np.ndarray) -> float:
    """sup |F_a - F_b^w| for an unweighted sample a and a weighted sample b."""
    a = np.sort(a)
    order = np.argsort(b, kind="stable")
    bs, ws = b[order], wb[order]
    cw = np.cumsum(ws) / ws.sum()
    grid = np.concatenate([a, bs])
    Fa = np.searchsorted(a, grid, side="right") / len(a)
    idx = np.searchsorted(bs, grid, side="right")
    Fb = np.where(idx > 0, cw[np.maximum(idx - 1, 0)], 0.0)
    return float(np.max(np.abs(Fa - Fb)))


@dataclass(frozen=True)
class DoobCheck:
    ks_statistic: float
    threshold: float
    passed: bool
    n_direct: int
    n_effective: float
    mean_weight: float
    reflect_events: int

    def as_dict(self) -> dict:
        return {"ks_statistic": self.ks_statistic, "threshold": self.threshold,
                "pass": self.passed, "n_direct": self.n_direct,
                "n_effective": self.n_effective, "mean_weight": self.mean_weight,
                "reflect_events": self.reflect_events}


@dataclass
class DoobSamples:
    direct: np.ndarray
    physical: np.ndarray
    weights: np.ndarray
    reflect_events: int


def doob_samples(m: ModelParams, cfg: SimConfig) -> DoobSamples:
    """(A) the conditioned SDE; (B) physical paths weighted by h(X_T)/h(x0), 0 if absorbed."""
    if not 0.0 < m.gamma < 2.0:
        raise WrongRegime("the Doob check needs 0 < gamma < 2")
    cfg = cfg.with_(measure=Measure.Physical)
    direct = simulate(m, cfg, extra_drift=lambda x: arb.doob_drift(m, x), stream=1)
    phys = simulate(m, cfg, stream=2)
    h0, _ = arb.harmonic_h(m, m.x0)
    hT, _ = arb.harmonic_h(m, phys.terminal)
    w = np.where(phys.absorbed, 0.0, hT / h0)
    return DoobSamples(direct.terminal, phys.terminal, w, direct.reflect_events)


def doob_statistic(s: DoobSamples, misweight: bool = False) -> DoobCheck:
    """Weighted two-sample KS at 1%; the weighted side enters through its Kish
    effective size. ``misweight`` squares the weights, a control that must fail."""
    w = s.weights * s.weights if misweight else s.weights
    n_eff = float(w.sum() ** 2 / (w * w).sum())
    n = len(s.direct)
    D = weighted_ks(s.direct, s.physical, w)
    crit = KS_C_1PCT * math.sqrt((n + n_eff) / (n * n_eff))
    return DoobCheck(D, crit, D < crit, n, n_eff, float(np.mean(w)), s.reflect_events)


def doob_law_check(m: ModelParams, cfg: SimConfig, misweight: bool = False) -> DoobCheck:
    """Conditioned SDE against h-weighted physical paths."""
    return doob_statistic(doob_samples(m, cfg), misweight)


def expected_density(m: ModelParams, cfg: SimConfig, level: float = 0.99) -> EstimateCI:
    """E[Z_T] under the physical measure."""
    ens = simulate(m, cfg.with_(measure=Measure.Physical), track_density=True)
    return mean_ci(ens.Z, level)


@dataclass(frozen=True)
class DensityPath:
    times: np.ndarray
    Z: np.ndarray
    phi_gap: Optional[float] = None


def density_process(m: ModelParams, ens, path_index: int = 0, r: Optional[float] = None) -> DensityPath:
    """Z along one stored path; at g = 2 also the gap in
    phi(X_t) = phi(X_0) e^{-(rho + r) t} Z_t, taken relative.

    Z is exact at g = 2 (constant lambda), so the gap is the strong error of
    ln X: O(dt) on a Milstein path, O(dt^{1/2}) on a drift-implicit Euler one.
    """
    if ens.increments is None or ens.paths is None:
        raise MissingIncrements("simulate with store_paths=True to keep increments")
    rr = m.r if r is None else r
    x = ens.paths[path_index]
    dW = ens.increments[path_index]
    dt = ens.times[1] - ens.times[0]
    lam = (m.mu - rr) / m.sigma * x[:-1] ** (1.0 - 0.5 * m.gamma)
    alive = x[:-1] > 0
    inc = np.where(alive, -lam * dW - 0.5 * lam * lam * dt, 0.0)
    Z = np.exp(np.concatenate([[0.0], np.cumsum(inc)]))
    gap = None
    if m.gamma == 2.0:
        mm = ModelParams(mu=m.mu, sigma=m.sigma, gamma=2.0, r=rr, x0=m.x0)
        rho = arb.black_scholes_rho(mm)
        lhs = arb.candidate_phi(mm, x)
        rhs = arb.candidate_phi(mm, x[0]) * np.exp(-(rho + rr) * ens.times) * Z
        gap = float(np.max(np.abs(lhs / rhs - 1.0)))
    return DensityPath(ens.times, Z, gap)


def gbm_weak_bias(m: ModelParams, cfg: SimConfig, level: float = 0.99) -> EstimateCI:
    """E[X_T^scheme - X_T^exact] at g = 2 with shared Brownian paths."""
    if m.gamma != 2.0:
        raise WrongRegime("exact reference only at gamma = 2")
    ens = simulate(m, cfg)
    return mean_ci(ens.terminal - exact_gbm_terminal(m, cfg, ens.W_T), level)
