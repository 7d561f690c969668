"""Simulation configuration and result containers."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import stats

from cevspec.errors import ConfigInvalid


class Scheme(str, enum.Enum):
    EulerMaruyamaAbsorbed = "EulerMaruyamaAbsorbed"
    MilsteinAbsorbed = "MilsteinAbsorbed"


class Measure(str, enum.Enum):
    Physical = "Physical"
    RiskNeutral = "RiskNeutral"


@dataclass(frozen=True)
class SimConfig:
    n_paths: int = 100_000
    dt: float = 1e-3
    T: float = 1.0
    scheme: Scheme = Scheme.EulerMaruyamaAbsorbed
    seed: int = 0
    measure: Measure = Measure.Physical
    antithetic: bool = False
    block_size: int = 16384

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "measure", Measure(self.measure))
        if not isinstance(self.n_paths, (int, np.integer)) or self.n_paths < 1:
            raise ConfigInvalid(f"n_paths must be a positive integer, got {self.n_paths!r}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigInvalid(f"dt must be > 0, got {self.dt}")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ConfigInvalid(f"T must be > 0, got {self.T}")
        if self.dt > self.T:
            raise ConfigInvalid(f"dt = {self.dt} exceeds T = {self.T}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigInvalid("seed must fit in 64 bits")
        if self.block_size < 2 or self.block_size % 2:
            raise ConfigInvalid("block_size must be an even integer >= 2")

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.T / self.dt)))

    def with_(self, **kw) -> "SimConfig":
        return replace(self, **kw)

    def as_dict(self) -> dict:
        return {"n_paths": int(self.n_paths), "dt": self.dt, "T": self.T,
                "scheme": self.scheme.value, "seed": int(self.seed),
                "measure": self.measure.value, "antithetic": self.antithetic}


@dataclass
class PathEnsemble:
    terminal: np.ndarray
    absorption_time: np.ndarray          # nan where never absorbed
    Z: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    clamp_events: int = 0
    reflect_events: int = 0
    n_steps: int = 0
    paths: Optional[np.ndarray] = None   # (n_paths, n_steps + 1) when stored
    increments: Optional[np.ndarray] = None
    times: Optional[np.ndarray] = None
    W_T: Optional[np.ndarray] = None

    @property
    def absorbed(self) -> np.ndarray:
        return ~np.isnan(self.absorption_time)

    @property
    def clamp_fraction(self) -> float:
        total = len(self.terminal) * max(self.n_steps, 1)
        return self.clamp_events / total


@dataclass(frozen=True)
class EstimateCI:
    point: float
    std_error: float
    level: float = 0.99
    n_effective: int = 0
    note: str = ""

    def __post_init__(self):
        if self.std_error < 0:
            raise ValueError("std_error must be >= 0")

    @property
    def half_width(self) -> float:
        return float(stats.norm.ppf(0.5 + 0.5 * self.level)) * self.std_error

    @property
    def lo(self) -> float:
        return self.point - self.half_width

    @property
    def hi(self) -> float:
        return self.point + self.half_width

    def contains(self, v: float) -> bool:
        return self.lo <= v <= self.hi

    def as_dict(self) -> dict:
        return {"estimate": self.point, "std_error": self.std_error,
                "ci_level": self.level, "ci": [self.lo, self.hi],
                "n_effective": int(self.n_effective), "note": self.note}


def mean_ci(samples: np.ndarray, level: float = 0.99, note: str = "") -> EstimateCI:
    s = np.asarray(samples, dtype=float)
    n = len(s)
    se = float(np.std(s, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return EstimateCI(float(np.mean(s)), se, level, n, note)
