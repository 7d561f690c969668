"""Crank-Nicolson solve of the backward equation for the absorption probability.

u(x, t) = P(zeta <= t | X_0 = x) satisfies u_t = mu x u_x + 1/2 s^2 x^g u_xx,
u(0, t) = 1, u(x, 0) = 0 for x > 0, and u -> 0 far from the origin.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as spla

from cevspec.errors import WrongRegime
from cevspec.params import ModelParams


def stretched_grid(x_max: float, n: int, lo_ratio: float = 1e-8) -> np.ndarray:
    """0 followed by n geometric nodes on [lo_ratio x_max, x_max]; the
    near-origin layer of the absorption problem needs the log spacing."""
    return np.concatenate([[0.0], np.geomspace(lo_ratio * x_max, x_max, n)])


def _operator(m: ModelParams, x: np.ndarray, rate: float) -> sparse.csr_matrix:
    """Three-point non-uniform discretization of rate x d/dx + 1/2 s^2 x^g d2/dx2 on interior nodes."""
    h_minus = x[1:-1] - x[:-2]
    h_plus = x[2:] - x[1:-1]
    xi = x[1:-1]
    D = 0.5 * m.sigma ** 2 * xi ** m.gamma
    A = rate * xi
    lo = 2 * D / (h_minus * (h_minus + h_plus)) - A / (h_minus + h_plus)
    hi = 2 * D / (h_plus * (h_minus + h_plus)) + A / (h_minus + h_plus)
    di = -(lo + hi)
    n = len(xi)
    return sparse.diags([lo[1:], di, hi[:-1]], [-1, 0, 1], shape=(n, n), format="csc"), lo[0], hi[-1]


def absorption_probability_pde(m: ModelParams, t: float, nx: int = 2000, nt: int = 2000,
                               rannacher: int = 4, x_max: float | None = None,
                               rate: float | None = None) -> float:
    if m.gamma >= 2.0:
        raise WrongRegime("0 is not attainable for gamma >= 2")
    mu = m.mu if rate is None else rate
    if x_max is None:
        x_max = m.x0 * math.exp(max(mu, 0.0) * t) * 10.0
    x = stretched_grid(x_max, nx)
    L, lo0, _ = _operator(m, x, mu)
    n = L.shape[0]
    I = sparse.identity(n, format="csc")
    bc = np.zeros(n)
    bc[0] = lo0  # u(0) = 1 enters the first interior row
    u = np.zeros(n)
    dt = t / nt
    # Rannacher start-up: implicit Euler half steps smooth the boundary mismatch
    be = spla.factorized((I - 0.5 * dt * L).tocsc())
    for _ in range(2 * rannacher):
        u = be(u + 0.5 * dt * bc)
    cn_lhs = spla.factorized((I - 0.5 * dt * L).tocsc())
    cn_rhs = (I + 0.5 * dt * L).tocsr()
    for _ in range(nt - rannacher):
        u = cn_lhs(cn_rhs @ u + dt * bc)
    full = np.concatenate([[1.0], u, [0.0]])
    return float(np.interp(m.x0, x, full))


def absorption_oracle(m: ModelParams, t: float, nx: int = 2000, nt: int = 2000) -> dict:
    """PDE value and its gap to the half-resolution solve."""
    fine = absorption_probability_pde(m, t, nx, nt)
    coarse = absorption_probability_pde(m, t, nx // 2, nt // 2)
    return {"value": fine, "coarse": coarse, "resolution_gap": abs(fine - coarse)}


def feller_absorption(m: ModelParams, t: float) -> float:
    """Closed form at g = 1: exp(-2 mu x0 / (s^2 (1 - e^{-mu t})))."""
    if m.gamma != 1.0:
        raise WrongRegime("closed form only at gamma = 1")
    return math.exp(-2.0 * m.mu * m.x0 / (m.sigma ** 2 * (1.0 - math.exp(-m.mu * t))))
