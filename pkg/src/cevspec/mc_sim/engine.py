"""Path generation.

Below gamma = 2 the price itself is stepped (drift-implicit Euler or explicit
Milstein) and absorbed at the first non-positive value. At gamma = 2 the
same step is used with a positive floor. Above 2 the scheme runs on
Y = X^(2-g), whose diffusion is square-root type, since explicit steps on
X with its superlinear volatility have unbounded moments.
"""

from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np

from cevspec.mc_sim.config import Measure, PathEnsemble, Scheme, SimConfig
from cevspec.params import ModelParams

FLOOR = 1e-12


def block_rng(seed: int, block: int, stream: int = 0) -> np.random.Generator:
    """Counter-based stream for one block of paths."""
    key = np.array([int(seed) & (2 ** 64 - 1), (stream << 32) | block], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _normals(rng: np.random.Generator, n: int, antithetic: bool) -> np.ndarray:
    if not antithetic:
        return rng.standard_normal(n)
    half = rng.standard_normal((n + 1) // 2)
    return np.concatenate([half, -half])[:n]


def drift_rate(m: ModelParams, measure: Measure) -> float:
    return m.r if measure is Measure.RiskNeutral else m.mu


def simulate(m: ModelParams, cfg: SimConfig, extra_drift: Optional[Callable] = None,
             track_density: bool = False, store_paths: bool = False,
             stream: int = 0) -> PathEnsemble:
    """Simulate ``cfg.n_paths`` paths of the CEV SDE over [0, T].

    ``extra_drift(x)`` is added to the linear drift (used by the conditioned
    process, which must not reach 0: such steps are reflected and counted).
    ``track_density`` accumulates the density process with risk premium
    ((mu - r)/sigma) x^(1 - g/2), frozen at absorption.
    """
    n, N, dt = int(cfg.n_paths), cfg.n_steps, cfg.T / cfg.n_steps
    terminal = np.empty(n)
    W_T = np.empty(n)
    t_abs = np.full(n, np.nan)
    logZ = np.zeros(n) if track_density else None
    paths = np.empty((n, N + 1)) if store_paths else None
    incs = np.empty((n, N)) if store_paths else None
    clamps = reflects = 0
    for b, start in enumerate(range(0, n, cfg.block_size)):
        stop = min(start + cfg.block_size, n)
        rng = block_rng(cfg.seed, b, stream)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = _simulate_block(m, cfg, stop - start, N, dt, rng, extra_drift,
                                  track_density, store_paths)
        terminal[start:stop] = out["x"]
        W_T[start:stop] = out["W"]
        t_abs[start:stop] = out["t_abs"]
        clamps += out["clamps"]
        reflects += out["reflects"]
        if track_density:
            logZ[start:stop] = out["logZ"]
        if store_paths:
            paths[start:stop] = out["paths"]
            incs[start:stop] = out["incs"]
    return PathEnsemble(
        terminal=terminal, absorption_time=t_abs,
        Z=np.exp(logZ) if track_density else None,
        clamp_events=clamps, reflect_events=reflects, n_steps=N,
        paths=paths, increments=incs, W_T=W_T,
        times=np.linspace(0.0, N * dt, N + 1) if store_paths else None,
    )


def _simulate_block(m, cfg, n, N, dt, rng, extra_drift, track_density, store_paths):
    g, s = m.gamma, m.sigma
    b = drift_rate(m, cfg.measure)
    sq = math.sqrt(dt)
    lam_c = (m.mu - m.r) / s
    x = np.full(n, m.x0)
    alive = np.ones(n, bool)
    t_abs = np.full(n, np.nan)
    logZ = np.zeros(n)
    W = np.zeros(n)
    clamps = reflects = 0
    paths = incs = None
    if store_paths:
        paths = np.empty((n, N + 1))
        incs = np.empty((n, N))
        paths[:, 0] = x
    above = g > 2.0
    if above:
        k = 2.0 - g
        y = x ** k
        c0 = 0.5 * k * (1.0 - g) * s * s
    for step in range(N):
        dW = sq * _normals(rng, n, cfg.antithetic)
        W += dW
        if track_density:
            lam = lam_c * x ** (1.0 - 0.5 * g)
            logZ = np.where(alive, logZ - lam * dW - 0.5 * lam * lam * dt, logZ)
        if above:
            yn = (y + c0 * dt + k * s * np.sqrt(y) * dW) / (1.0 - k * b * dt)
            low = yn < FLOOR
            clamps += int(low.sum())
            y = np.where(low, FLOOR, yn)
            x = y ** (1.0 / k)
        else:
            vol = s * x ** (0.5 * g)
            if cfg.scheme is Scheme.MilsteinAbsorbed:
                xn = x + b * x * dt + vol * dW + 0.25 * s * s * g * x ** (g - 1.0) * (dW * dW - dt)
            else:
                xn = (x + vol * dW) / (1.0 - b * dt)
            if extra_drift is not None:
                xn = xn + extra_drift(x) * dt
                neg = xn <= 0
                reflects += int(neg.sum())
                xn = np.where(neg, np.abs(xn) + FLOOR, xn)
            elif g < 2.0:
                hit = alive & (xn <= 0)
                t_abs[hit] = (step + 1) * dt
                alive &= ~hit
                xn = np.where(alive, xn, 0.0)
            else:
                low = xn < FLOOR
                clamps += int(low.sum())
                xn = np.where(low, FLOOR, xn)
            x = xn
        if store_paths:
            paths[:, step + 1] = x
            incs[:, step] = dW
    return {"x": x, "W": W, "t_abs": t_abs, "logZ": logZ, "clamps": clamps,
            "reflects": reflects, "paths": paths, "incs": incs}


def exact_gbm_terminal(m: ModelParams, cfg: SimConfig, W_T: np.ndarray) -> np.ndarray:
    b = drift_rate(m, cfg.measure)
    return m.x0 * np.exp((b - 0.5 * m.sigma ** 2) * cfg.T + m.sigma * W_T)
