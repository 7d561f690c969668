"""Pull the Laguerre analysis back to the CEV forward operator.

Coordinates: y = |nu| x^(2-g), a = 1/(2-g). Densities map through
U[p](x) = A x^B p(C x^D) with (A, B, C, D) = (|nu|(2-g), 1-g, |nu|, 2-g);
above g = 2 the extra twist M[g](y) = e^{-y} g(y) is applied first.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from cevspec import specfun as sf
from cevspec.errors import (
    ExtensionNotApplicable,
    NonConvergentTail,
    SingularGamma,
    WrongEndpoint,
)
from cevspec.laguerre_spec import (
    EigenKind,
    EigenfunctionSpec,
    Extension,
    Limit,
    boundary_B0,
    boundary_B1,
    extrapolate_limit,
    kummer_eigensolution,
    laguerre_eigenfunction,
    laguerre_spectrum,
)
from cevspec.params import Band, ModelParams, classify_regime, derive_params
from cevspec.sl_core import (
    Jet,
    apply_fp,
    compose_jet,
    cev_weight,
    fp_scale,
    log_cev_weight,
    power_jet,
)


def _require_not_two(m: ModelParams):
    if m.gamma == 2.0:
        raise SingularGamma("the Laguerre mapping is undefined at gamma = 2")


# ------------------------------------------------------------ coordinates

def to_y(d, x):
    nu = d.require("nu")
    return abs(nu) * np.power(x, 2.0 - d.gamma)


def to_x(d, y):
    nu = d.require("nu")
    return np.power(np.asarray(y, dtype=float) / abs(nu), 1.0 / (2.0 - d.gamma))


@dataclass(frozen=True)
class TransformParams:
    A: float
    B: float
    C: float
    D: float
    twist: bool = False

    def __post_init__(self):
        if self.A == 0 or self.C <= 0 or self.D == 0:
            raise ValueError("need A != 0, C > 0, D != 0")


def cev_transform(d) -> TransformParams:
    nu = d.require("nu")
    g = d.gamma
    return TransformParams(abs(nu) * (2.0 - g), 1.0 - g, abs(nu), 2.0 - g, twist=nu > 0)


def _exp_neg_jet(y) -> Jet:
    e = np.exp(-np.asarray(y, dtype=float))
    return Jet(e, -e, e)


def push_jet(t: TransformParams, G: Callable, x, prefactor: Optional[float] = None,
             twist: Optional[bool] = None) -> Jet:
    """x-jet of A x^B [M G](C x^D); G maps y to the Jet of its y-derivatives."""
    x = np.asarray(x, dtype=float)
    A = t.A if prefactor is None else prefactor
    tw = t.twist if twist is None else twist
    C, D = t.C, t.D
    y = C * x ** D
    inner = Jet(y, C * D * x ** (D - 1.0), C * D * (D - 1.0) * x ** (D - 2.0))
    gy = G(y)
    if tw:
        gy = _exp_neg_jet(y) * gy
    return power_jet(x, t.B).scale(A) * compose_jet(gy, inner)


def push_density(d, p_Y: Callable, x, twist: Optional[bool] = None):
    """U[p_Y](x) = A x^B p_Y(C x^D); with the twist, p_Y is g and e^{-y} g is mapped."""
    t = cev_transform(d)
    x = np.asarray(x, dtype=float)
    y = t.C * x ** t.D
    tw = t.twist if twist is None else twist
    inner = np.exp(-y) * p_Y(y) if tw else p_Y(y)
    return t.A * x ** t.B * inner


def pull_density(d, p_X: Callable, y, twist: Optional[bool] = None):
    """U^{-1}[q](y) = (1/A)(y/C)^{-B/D} q((y/C)^{1/D}), then M^{-1} if twisted."""
    t = cev_transform(d)
    y = np.asarray(y, dtype=float)
    r = y / t.C
    out = r ** (-t.B / t.D) * p_X(r ** (1.0 / t.D)) / t.A
    tw = t.twist if twist is None else twist
    return np.exp(y) * out if tw else out


def y_weight(d, y):
    """Exact Y-side weight making U an isometry:
    |2-g| |nu|^{1-a} y^a exp(sign(nu) y)."""
    nu = d.require("nu")
    a = d.require("a")
    y = np.asarray(y, dtype=float)
    return abs(2.0 - d.gamma) * abs(nu) ** (1.0 - a) * y ** a * np.exp(math.copysign(1.0, nu) * y)


def apply_ybar(m: ModelParams, j: Jet, y):
    """Y-side forward operator eta |nu| [y p'' + (1 + a + s y) p' + s p], s = sign(nu)."""
    d = derive_params(m)
    nu, a = d.require("nu"), d.require("a")
    s = math.copysign(1.0, nu)
    y = np.asarray(y, dtype=float)
    return d.eta * abs(nu) * (y * j.d2 + (1.0 + a + s * y) * j.d1 + s * j.v)


def apply_ybar_twisted(m: ModelParams, j: Jet, y):
    """M^{-1} Ybar M g = (g-2) mu [y g'' + (1 + a - y) g' + g/(g-2)]."""
    d = derive_params(m)
    a = d.require("a")
    gm2 = m.gamma - 2.0
    y = np.asarray(y, dtype=float)
    return gm2 * m.mu * (y * j.d2 + (1.0 + a - y) * j.d1 + j.v / gm2)


# --------------------------------------------------------------- spectrum

class Sector(str, enum.Enum):
    Positive = "positive"
    Zero = "zero"
    Negative = "negative"


@dataclass(frozen=True)
class CevSpectralPoint:
    lam: float
    laguerre_Lambda: float
    index: Optional[int]
    positive: bool
    sector: Sector

    def as_dict(self) -> dict:
        return {"lambda": self.lam, "Lambda": self.laguerre_Lambda,
                "index": self.index, "positive": self.positive,
                "sector": self.sector.value}


def lambda_from_Lambda(m: ModelParams, Lambda: float, n: Optional[int] = None) -> float:
    g, mu = m.gamma, m.mu
    if g < 2.0:
        if n is not None:
            return -mu * (2.0 - g) * (n + 1)
        return mu * (2.0 - g) * (Lambda - 1.0)
    if n is not None:
        return mu - n * mu * (g - 2.0)
    return mu * (g - 2.0) * (Lambda + 1.0 / (g - 2.0))


def Lambda_from_lambda(m: ModelParams, lam: float) -> float:
    g, mu = m.gamma, m.mu
    if g < 2.0:
        return lam / (mu * (2.0 - g)) + 1.0
    return lam / (mu * (g - 2.0)) - 1.0 / (g - 2.0)


def check_extension(m: ModelParams, ext: Extension):
    _require_not_two(m)
    if ext.is_infinite:
        return
    reg = classify_regime(m.gamma)
    if reg.limit_circle_endpoint() is None:
        raise ExtensionNotApplicable(
            f"gamma = {m.gamma}: both endpoints limit point; only theta = inf is admissible")


def default_lambda_window(a: float, theta: float, count: int) -> tuple:
    c = -sf.gamma_ratio([-a], [1.0 + a])   # m_a(L) ~ c L^a for large L
    upper = 60.0
    if c != 0.0 and theta / c > 0:
        upper = max(upper, 2.0 * (theta / c) ** (1.0 / a) + 10.0)
    return (-float(count) - 1.0 + 1e-9, min(upper, 1e7))


def cev_spectrum(m: ModelParams, ext, count: Optional[int] = None,
                 window: Optional[tuple] = None) -> list:
    """Eigenvalues of L_g for the theta-extension, largest first.

    ``window`` is in Laguerre units (Lambda). For finite theta and no window
    a search range is derived from ``count``.
    """
    ext = Extension.parse(ext)
    check_extension(m, ext)
    d = derive_params(m)
    a = d.require("a")
    if ext.is_infinite:
        spec = laguerre_spectrum(a, ext, window=window, count=count)
    else:
        if window is None:
            if count is None:
                raise ValueError("give count or window")
            window = default_lambda_window(a, ext.theta, count)
        spec = laguerre_spectrum(a, ext, window=window, count=count)
    out = []
    for p in spec:
        lam = lambda_from_Lambda(m, p.value, p.index)
        if lam > 0:
            sector = Sector.Positive
        elif lam == 0:
            sector = Sector.Zero
        else:
            sector = Sector.Negative
        out.append(CevSpectralPoint(lam, p.value, p.index, lam > 0, sector))
    out.sort(key=lambda q: -q.lam)
    return out


def positive_sector(m: ModelParams) -> dict:
    """theta = inf counts: n <= 1/(g-2) gives lambda_n >= 0 above g = 2."""
    _require_not_two(m)
    g = m.gamma
    if g < 2.0:
        return {"positive": 0, "nonnegative": 0, "zero_mode": False}
    bound = 1.0 / (g - 2.0)
    nonneg = math.floor(bound) + 1
    zero = bound == math.floor(bound)
    return {"positive": nonneg - (1 if zero else 0), "nonnegative": nonneg,
            "zero_mode": zero}


# ---------------------------------------------------------- eigenfunctions

class Recipe(str, enum.Enum):
    PolyBranchBelow2 = "PolyBranchBelow2"
    PolyBranchAbove2 = "PolyBranchAbove2"
    PsiBranch = "PsiBranch"


@dataclass(frozen=True)
class CevEigenfunction:
    m: ModelParams
    recipe: Recipe
    lam: float
    y_spec: EigenfunctionSpec
    prefactor: float
    twist: bool
    c: float = 1.0

    @property
    def transform(self) -> TransformParams:
        return cev_transform(derive_params(self.m))

    def jet(self, x) -> Jet:
        return push_jet(self.transform, self.y_spec.jet, x, prefactor=self.prefactor,
                        twist=self.twist)

    def __call__(self, x):
        return self.jet(x).v

    def value(self, x):
        x = np.asarray(x, dtype=float)
        t = self.transform
        y = t.C * x ** t.D
        g = self.y_spec(y)
        if self.twist:
            g = np.exp(-y) * g
        return self.prefactor * x ** t.B * g

    def residual(self, x):
        """|L_g p - lam p| / (sum of |terms| of L_g p + |lam p|)."""
        j = self.jet(x)
        lp = apply_fp(self.m, j, x)
        den = fp_scale(self.m, j, x) + np.abs(self.lam * j.v) + 1e-300
        return np.abs(lp - self.lam * j.v) / den


def cev_eigenfunction(m: ModelParams, ext, point: CevSpectralPoint,
                      c: float = 1.0) -> CevEigenfunction:
    """Eigenfunction for a point from :func:`cev_spectrum` under the same ext.

    Polynomial branch: x^(1-g) L_n^a(|nu| x^(2-g)) below 2 and
    x^(1-g) e^{-nu x^(2-g)} L_n^a(nu x^(2-g)) above. Finite theta: the Psi
    branch c |nu| (2-g) x^(1-g) [e^{-y}] Psi(L, 1+a, y).
    """
    ext = Extension.parse(ext)
    check_extension(m, ext)
    d = derive_params(m)
    a, nu = d.require("a"), d.require("nu")
    twist = nu > 0
    if point.index is not None:
        spec = laguerre_eigenfunction(a, point.index)
        rec = Recipe.PolyBranchAbove2 if twist else Recipe.PolyBranchBelow2
        return CevEigenfunction(m, rec, point.lam, spec, 1.0, twist, 1.0)
    spec = kummer_eigensolution(a, point.laguerre_Lambda, 0.0, 1.0)
    pref = c * abs(nu) * (2.0 - m.gamma)
    return CevEigenfunction(m, Recipe.PsiBranch, point.lam, spec, pref, twist, c)


def psi_branch(m: ModelParams, Lambda: float, c: float = 1.0) -> CevEigenfunction:
    """Psi-branch eigenfunction for an arbitrary admissible Lambda."""
    _require_not_two(m)
    lam = lambda_from_Lambda(m, Lambda)
    pt = CevSpectralPoint(lam, Lambda, None, lam > 0, Sector.Positive if lam > 0 else Sector.Negative)
    d = derive_params(m)
    a, nu = d.require("a"), d.require("nu")
    spec = kummer_eigensolution(a, Lambda, 0.0, 1.0)
    return CevEigenfunction(m, Recipe.PsiBranch, pt.lam, spec,
                            c * abs(nu) * (2.0 - m.gamma), nu > 0, c)


def poly_branch(m: ModelParams, n: int) -> CevEigenfunction:
    pts = cev_spectrum(m, Extension.infinity(), count=n + 1)
    pt = [p for p in pts if p.index == n][0]
    return cev_eigenfunction(m, Extension.infinity(), pt)


def theta_of_Lambda(a: float, Lambda: float) -> float:
    """Solve Gamma(-a)/Gamma(L-a) + theta Gamma(1+a)/Gamma(L) = 0 for theta."""
    b1 = sf.gamma_ratio([-a], [Lambda - a])
    b0 = sf.gamma_ratio([1.0 + a], [Lambda])
    return -b1 / b0


# -------------------------------------------------------- boundary residuals

def _default_boundary_grid(endpoint: str, k: int = 30):
    ks = np.arange(k + 1)
    return 2.0 ** -ks if endpoint == "zero" else 2.0 ** ks


def cev_boundary_residual(m: ModelParams, ext, p: CevEigenfunction, endpoint: str,
                          grid=None, mode: str = "printed") -> np.ndarray:
    """Boundary expression along a grid approaching the limit-circle endpoint.

    mode "printed", theta = inf:
      g < 1 at 0:      x^g [x p' + (g-1) p]
      g > 2 at inf:    x [1/2 s^2 x^g p' + 1/2 s^2 (g-1) x^(g-1) p - mu x p]
    mode "printed", finite theta at 0 (g < 1): B1 - theta B0 pulled back,
      B1 = x^g p' + g x^(g-1) p, B0 = |nu|^a/(2-g) x^g [x p' + (g-1) p].
    mode "laguerre" (or finite theta at inf): B1 - theta B0 of the Y-side
    function (after removing the twist) along y = |nu| x^(2-g).
    """
    ext = Extension.parse(ext)
    check_extension(m, ext)
    reg = classify_regime(m.gamma)
    lc = reg.limit_circle_endpoint()
    endpoint = endpoint.lower()
    if endpoint not in ("zero", "infinity") or endpoint != lc:
        raise WrongEndpoint(f"limit-circle endpoint for gamma = {m.gamma} is {lc}, got {endpoint}")
    d = derive_params(m)
    a, nu = d.require("a"), d.require("nu")
    g, s2, mu = m.gamma, m.sigma ** 2, m.mu
    x = np.asarray(_default_boundary_grid(endpoint) if grid is None else grid, dtype=float)

    if mode == "printed" and (endpoint == "zero" or ext.is_infinite):
        j = p.jet(x)
        if endpoint == "zero":
            b0 = x ** g * (x * j.d1 + (g - 1.0) * j.v)
            if ext.is_infinite:
                return b0
            b1 = x ** g * j.d1 + g * x ** (g - 1.0) * j.v
            return b1 - ext.theta * abs(nu) ** a / (2.0 - g) * b0
        terms = (0.5 * s2 * x ** g * j.d1, 0.5 * s2 * (g - 1.0) * x ** (g - 1.0) * j.v,
                 -mu * x * j.v)
        return x * sum(terms)

    # Y-side route: q(y) = p(x) / (prefactor x^B), g = e^{y} q when twisted
    y = abs(nu) * x ** (2.0 - g)
    f = p.y_spec
    if -1.0 < a < 1.0:
        b0 = y ** (a + 1.0) * f.deriv(y, 1)
    elif a < -1.0 and a != math.floor(a):
        n = int(math.floor(-a))
        c = (-1) ** n * sf.gamma_ratio([a + 1.0], [a + n + 1.0])
        b0 = c * y ** (a + n + 1.0) * f.deriv(y, n + 1)
    else:
        raise ExtensionNotApplicable(f"no boundary operator for integer a = {a}")
    if ext.is_infinite:
        return np.asarray(b0, dtype=float)
    if 0.0 < a < 1.0:
        b1 = f.deriv(y, 0) + y / a * f.deriv(y, 1)
    else:
        b1 = f.deriv(y, 0)
    return np.asarray(b1 - ext.theta * b0, dtype=float)


def cev_boundary_limit(m: ModelParams, ext, p: CevEigenfunction, endpoint: str,
                       tol: float = 1e-6) -> Limit:
    """Limit of B1 - theta B0 at the limit-circle endpoint.

    B1 and B0 are extrapolated separately: each has a finite limit, while
    their combination decays slowly through cancelling singular pieces.
    At 0 the x-space pullbacks are used; at infinity the Y-side operators.
    """
    ext = Extension.parse(ext)
    check_extension(m, ext)
    lc = classify_regime(m.gamma).limit_circle_endpoint()
    if endpoint != lc:
        raise WrongEndpoint(f"limit-circle endpoint for gamma = {m.gamma} is {lc}, got {endpoint}")
    d = derive_params(m)
    a, nu = d.require("a"), d.require("nu")
    g = m.gamma
    if endpoint == "zero":
        def b1(x):
            j = p.jet(np.array([x]))
            return float((x ** g * j.d1 + g * x ** (g - 1.0) * j.v)[0])

        def b0(x):
            j = p.jet(np.array([x]))
            return float((abs(nu) ** a / (2.0 - g) * x ** g * (x * j.d1 + (g - 1.0) * j.v))[0])

        l0 = extrapolate_limit(b0, tol=tol)
        if ext.is_infinite:
            return l0
        l1 = extrapolate_limit(b1, tol=tol)
    else:
        # x -> inf is y -> 0; work on the untwisted Y-side function
        l0 = boundary_B0(a, p.y_spec, tol=tol)
        if ext.is_infinite:
            return l0
        l1 = boundary_B1(a, p.y_spec, tol=tol)
    val = l1.value - ext.theta * l0.value
    err = l1.error + abs(ext.theta) * l0.error
    # samples carry the two limits so callers can scale the residual
    return Limit(val, err, (l1.value, l0.value))


# ------------------------------------------------------------ integrability

@dataclass(frozen=True)
class IntegrabilityReport:
    is_normalizable: bool
    sign_definite: bool
    exponent_zero: float
    exponent_infinity: float
    moments_finite: tuple
    moments_checked: tuple
    mass: Optional[float]
    description: str

    def as_dict(self) -> dict:
        return {
            "is_normalizable": self.is_normalizable,
            "sign_definite": self.sign_definite,
            "exponent_zero": self.exponent_zero,
            "exponent_infinity": self.exponent_infinity,
            "moments_finite": list(self.moments_finite),
            "moments_checked": list(self.moments_checked),
            "mass": self.mass,
            "description": self.description,
        }


_STEEP = 40.0  # log-log slopes beyond this are treated as faster than any power


def tail_exponent(fn: Callable, endpoint: str, k0: int = 20, k1: int = 40) -> float:
    """Log-log slope of |fn| toward an endpoint, from its two outermost
    samples on x = 2^(-/+k), k in [k0, k1]. +/-inf means faster than any power."""
    ks = np.arange(k0, k1 + 1, dtype=float)
    x = 2.0 ** (-ks) if endpoint == "zero" else 2.0 ** ks
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        v = np.abs(np.asarray(fn(x), dtype=float))
        lv = np.log(v)
    ok = np.isfinite(lv)
    if ok.sum() < 2:
        # value under/overflowed: super-polynomial behaviour
        return math.inf if endpoint == "zero" else -math.inf
    xs, ls = np.log(x[ok]), lv[ok]
    slope = (ls[-1] - ls[-2]) / (xs[-1] - xs[-2])
    if abs(slope) > _STEEP:
        return math.copysign(math.inf, slope)
    return float(slope)


def integrability_report(m: ModelParams, ext, p: CevEigenfunction,
                         moments=(0, 1, 2, 3, 4)) -> IntegrabilityReport:
    """Tail exponents at both ends decide integrability of x^k p; the mass is
    then computed by adaptive quadrature in ln x."""
    e0 = tail_exponent(p.value, "zero")
    einf = tail_exponent(p.value, "infinity")
    finite = tuple(k for k in moments if e0 + k > -1.0 and einf + k < -1.0)
    normalizable = 0 in finite
    xs = np.geomspace(1e-6, 1e6, 400)
    v = p.value(xs)
    nz = v[np.abs(v) > 0]
    sign_def = bool(len(nz) and (np.all(nz > 0) or np.all(nz < 0)))
    mass = None
    if normalizable:
        mass = _mass(p)
    desc = (f"near 0 ~ x^{e0:.4g}, near inf ~ x^{einf:.4g}; "
            f"finite moments among {list(moments)}: {list(finite)}")
    return IntegrabilityReport(normalizable, sign_def, e0, einf, finite,
                               tuple(moments), mass, desc)


def _mass(p: CevEigenfunction) -> float:
    def h(u):
        x = math.exp(u)
        return float(p.value(x)) * x
    total = 0.0
    edges = np.arange(-60.0, 61.0, 2.0)
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, _ = integrate.quad(h, lo, hi, epsabs=0.0, epsrel=1e-11, limit=200)
        total += v
    return total


def normalized_mass(m: ModelParams, p: CevEigenfunction) -> float:
    """Mass of p over (0, inf); raises NonConvergentTail with the growth exponent."""
    e0 = tail_exponent(p.value, "zero")
    einf = tail_exponent(p.value, "infinity")
    if not e0 > -1.0:
        raise NonConvergentTail(f"not integrable at 0 (exponent {e0:.4g})", exponent=e0)
    if not einf < -1.0:
        raise NonConvergentTail(f"not integrable at inf (exponent {einf:.4g})", exponent=einf)
    return _mass(p)


def weighted_norm_tail_exponent(m: ModelParams, p: CevEigenfunction) -> float:
    """Log-log slope of p^2 w_g at infinity; the norm diverges when >= -1."""
    d = derive_params(m)

    def f(x):
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            return np.exp(2.0 * np.log(np.abs(p.value(x))) + log_cev_weight(d, m.gamma, x))

    return tail_exponent(f, "infinity")


# ------------------------------------------------------ transform checks

def transform_consistency(m: ModelParams, p_Y: Callable, grid, twist: Optional[bool] = None) -> float:
    """Max relative gap between L_g U[p_Y] and U[Ybar p_Y] on ``grid``.

    With the twist (default above g = 2) p_Y is g and the second path uses
    the twisted Y operator: U M [M^{-1} Ybar M g].
    """
    _require_not_two(m)
    d = derive_params(m)
    t = cev_transform(d)
    tw = t.twist if twist is None else twist
    x = np.asarray(grid, dtype=float)
    jx = push_jet(t, p_Y, x, twist=tw)
    lhs = apply_fp(m, jx, x)
    y = t.C * x ** t.D
    jy = p_Y(y)
    img = apply_ybar_twisted(m, jy, y) if tw else apply_ybar(m, jy, y)
    rhs = t.A * x ** t.B * (np.exp(-y) * img if tw else img)
    scale = fp_scale(m, jx, x) + 1e-300
    return float(np.max(np.abs(lhs - rhs) / scale))


def isometry_gap(m: ModelParams, p_Y: Callable) -> dict:
    """Relative gap between ||U p||_{w_g} and ||p||_{w^Y}, both by quadrature."""
    _require_not_two(m)
    d = derive_params(m)
    t = cev_transform(d)
    g = m.gamma

    def fx(u):
        x = math.exp(u)
        y = t.C * x ** t.D
        py = abs(float(p_Y(y)))
        if py == 0.0:
            return 0.0
        lp = math.log(abs(t.A)) + t.B * u + math.log(py)
        return math.exp(2.0 * lp + float(log_cev_weight(d, g, x))) * x

    def fy(u):
        y = math.exp(u)
        return float(p_Y(y)) ** 2 * float(y_weight(d, y)) * y

    def q(fn, lo, hi, step=2.0):
        edges = np.arange(lo, hi + step, step)
        return sum(integrate.quad(fn, a_, b_, epsabs=0.0, epsrel=1e-12, limit=200)[0]
                   for a_, b_ in zip(edges[:-1], edges[1:]))

    # ln y in [-40, 6] covers every test density; map the same range to x
    ylo, yhi = -40.0, 6.0
    ulo = (ylo - math.log(t.C)) / t.D
    uhi = (yhi - math.log(t.C)) / t.D
    ulo, uhi = min(ulo, uhi), max(ulo, uhi)
    nx = q(fx, ulo, uhi, step=abs(2.0 / t.D))
    ny = q(fy, ylo, yhi)
    return {"norm_x_sq": nx, "norm_y_sq": ny, "gap": abs(nx - ny) / ny}


def mass_x(m: ModelParams, p_Y: Callable, twist: Optional[bool] = None) -> float:
    """int_0^inf U[p_Y](x) dx by quadrature in ln x."""
    d = derive_params(m)
    t = cev_transform(d)

    def h(u):
        x = math.exp(u)
        return float(push_density(d, p_Y, x, twist)) * x

    ylo, yhi = -40.0, 8.0
    ulo = (ylo - math.log(t.C)) / t.D
    uhi = (yhi - math.log(t.C)) / t.D
    ulo, uhi = min(ulo, uhi), max(ulo, uhi)
    step = abs(2.0 / t.D)
    edges = np.arange(ulo, uhi + step, step)
    return sum(integrate.quad(h, a_, b_, epsabs=0.0, epsrel=1e-12, limit=200)[0]
               for a_, b_ in zip(edges[:-1], edges[1:]))


# ------------------------------------------------------- stationary profile

def stationary_density(m: ModelParams, x):
    """pi(x) = x^g exp(nu x^(2-g)) in the printed form (equal to w_g)."""
    return cev_weight(derive_params(m), m.gamma, x)


def zero_flux_density(m: ModelParams, x):
    """x^(-g) exp(-nu x^(2-g)) = 1/w_g: the profile with L_g[pi] = 0 exactly."""
    x = np.asarray(x, dtype=float)
    d = derive_params(m)
    with np.errstate(over="ignore"):
        out = np.exp(-log_cev_weight(d, m.gamma, x))
    return float(out) if out.ndim == 0 else out


def _density_jet(m: ModelParams, x, sign: float) -> Jet:
    """Jet of exp(sign (g ln x + nu x^(2-g)))."""
    d = derive_params(m)
    g = m.gamma
    x = np.asarray(x, dtype=float)
    if g == 2.0:
        k = sign * d.require("q")
        return power_jet(x, k)
    nu = d.require("nu")
    e = np.exp(sign * (g * np.log(x) + nu * x ** (2.0 - g)))
    l1 = sign * (g / x + nu * (2.0 - g) * x ** (1.0 - g))
    l2 = sign * (-g / x ** 2 + nu * (2.0 - g) * (1.0 - g) * x ** (-g))
    return Jet(e, e * l1, e * (l1 * l1 + l2))


def stationary_jet(m: ModelParams, x) -> Jet:
    return _density_jet(m, x, +1.0)


def zero_flux_jet(m: ModelParams, x) -> Jet:
    return _density_jet(m, x, -1.0)


def stationary_residual(m: ModelParams, x, which: str = "printed"):
    """Term-scaled |L_g[pi]| for the printed or the zero-flux profile."""
    jf = stationary_jet if which == "printed" else zero_flux_jet
    j = jf(m, x)
    return np.abs(apply_fp(m, j, x)) / (fp_scale(m, j, x) + 1e-300)


def stationary_report(m: ModelParams, grid=None) -> dict:
    """Checks, rather than assumes, that the printed profile is stationary."""
    x = np.geomspace(0.1, 10.0, 200) if grid is None else np.asarray(grid, dtype=float)
    printed = float(np.max(stationary_residual(m, x, "printed")))
    zf = float(np.max(stationary_residual(m, x, "zero_flux")))
    return {
        "printed_max_scaled_residual": printed,
        "zero_flux_max_scaled_residual": zf,
        "printed_is_stationary": printed <= 1e-8,
        "note": ("the printed x^g exp(nu x^(2-g)) coincides with the SL weight; "
                 "the zero-flux stationary profile is its reciprocal"),
    }


def boundary_noise_floor(m: ModelParams, p: CevEigenfunction, x) -> np.ndarray:
    """Rounding floor of the printed infinity bracket: eps times its term sizes."""
    x = np.asarray(x, dtype=float)
    j = p.jet(x)
    g, s2 = m.gamma, m.sigma ** 2
    size = x * (np.abs(0.5 * s2 * x ** g * j.d1) + np.abs(0.5 * s2 * (g - 1.0) * x ** (g - 1.0) * j.v)
                + np.abs(m.mu * x * j.v))
    return 64.0 * np.finfo(float).eps * size
