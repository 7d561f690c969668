"""Model inputs, derived constants and regime classification."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

from cevspec.errors import ParameterInvalid, SingularGamma


class Band(str, enum.Enum):
    SubOne = "SubOne"
    OneToTwo = "OneToTwo"
    BlackScholes = "BlackScholes"
    SuperTwo = "SuperTwo"


class EndpointType(str, enum.Enum):
    LimitCircle = "LimitCircle"
    LimitPoint = "LimitPoint"
    Singular = "Singular"


@dataclass(frozen=True)
class ModelParams:
    """Raw CEV inputs for dX = mu X dt + sigma X^(gamma/2) dW."""

    mu: float
    sigma: float
    gamma: float
    r: float = 0.0
    x0: float = 1.0

    def __post_init__(self):
        for name in ("mu", "sigma", "gamma", "r", "x0"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ParameterInvalid(f"{name} must be a finite real, got {v!r}")
            object.__setattr__(self, name, float(v))
        if self.mu <= 0:
            raise ParameterInvalid(f"mu must be > 0, got {self.mu}")
        if self.sigma <= 0:
            raise ParameterInvalid(f"sigma must be > 0, got {self.sigma}")
        if self.x0 <= 0:
            raise ParameterInvalid(f"x0 must be > 0, got {self.x0}")
        if self.gamma < 0:
            raise ParameterInvalid(f"gamma must be >= 0, got {self.gamma}")
        if self.r < 0:
            raise ParameterInvalid(f"r must be >= 0, got {self.r}")

    @property
    def is_black_scholes(self) -> bool:
        return self.gamma == 2.0

    def as_dict(self) -> dict:
        return {"mu": self.mu, "sigma": self.sigma, "gamma": self.gamma,
                "r": self.r, "x0": self.x0}


@dataclass(frozen=True)
class DerivedParams:
    """Closed-form constants. At gamma = 2 the fields a, nu, delta are None
    and reading them through :meth:`require` raises SingularGamma."""

    gamma: float
    beta: float
    alpha: float
    eta: float
    nu: Optional[float]
    a: Optional[float]
    delta: Optional[float]
    q: Optional[float]
    nu_alt: Optional[float] = None  # -beta mu / eta, agrees with nu up to rounding

    def require(self, name: str) -> float:
        v = getattr(self, name)
        if v is None:
            raise SingularGamma(f"{name} is undefined at gamma = 2")
        return v

    @property
    def abs_nu(self) -> float:
        return abs(self.require("nu"))

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("beta", "alpha", "eta", "nu", "a", "delta", "q")}


def derive_params(m: ModelParams) -> DerivedParams:
    g, mu, s2 = m.gamma, m.mu, m.sigma ** 2
    beta = 2.0 - g
    alpha = (3.0 - g) * s2 / (2.0 * mu)
    eta = beta * beta * s2 / 2.0
    if g == 2.0:
        return DerivedParams(g, beta, alpha, eta, None, None, None,
                             2.0 * (s2 - mu) / s2)
    nu = 2.0 * mu / ((g - 2.0) * s2)
    return DerivedParams(
        gamma=g, beta=beta, alpha=alpha, eta=eta, nu=nu,
        a=1.0 / beta, delta=2.0 * (1.0 - g) / beta, q=None,
        nu_alt=-beta * mu / eta,
    )


@dataclass(frozen=True)
class Regime:
    band: Band
    endpoint_zero: EndpointType
    endpoint_infinity: EndpointType
    a_interval: str
    a: Optional[float] = None
    pontryagin_index: Optional[int] = None
    notes: tuple = field(default_factory=tuple)

    def limit_circle_endpoint(self) -> Optional[str]:
        if self.endpoint_zero is EndpointType.LimitCircle:
            return "zero"
        if self.endpoint_infinity is EndpointType.LimitCircle:
            return "infinity"
        return None

    def as_dict(self) -> dict:
        return {
            "band": self.band.value,
            "endpoint_zero": self.endpoint_zero.value,
            "endpoint_infinity": self.endpoint_infinity.value,
            "a_interval": self.a_interval,
            "a": self.a,
            "pontryagin_index": self.pontryagin_index,
            "notes": list(self.notes),
        }


def negative_interval_index(a: float) -> Optional[int]:
    """n with a in (-n-1, -n), or None when a >= 0 or a is an integer."""
    if a >= 0 or a == math.floor(a):
        return None
    return int(math.floor(-a))


def classify_regime(gamma: float) -> Regime:
    if gamma < 0 or not math.isfinite(gamma):
        raise ParameterInvalid(f"gamma must be a finite real >= 0, got {gamma}")
    LC, LP = EndpointType.LimitCircle, EndpointType.LimitPoint
    if gamma == 2.0:
        return Regime(
            Band.BlackScholes, EndpointType.Singular, EndpointType.Singular,
            "undefined (a = 1/(2-gamma) has a pole)",
            notes=("endpoint type at 0 depends on 2 sigma^2 versus mu; "
                   "reported, not decided",),
        )
    a = 1.0 / (2.0 - gamma)
    if gamma < 1.0:
        return Regime(Band.SubOne, LC, LP, "[1/2, 1)", a)
    if gamma < 2.0:
        return Regime(Band.OneToTwo, LP, LP, "[1, inf)", a)
    n = negative_interval_index(a)
    if n is None:
        label = f"a = {a:g} (negative integer)" if a == math.floor(a) else "(-1, 0)"
        return Regime(Band.SuperTwo, LP, LC, label, a)
    label = "(-1, 0)" if n == 0 else f"({-n - 1}, {-n})"
    return Regime(Band.SuperTwo, LP, LC, label, a, (n + 1) // 2)
