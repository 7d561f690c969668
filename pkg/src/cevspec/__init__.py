"""Spectral toolkit for the CEV Fokker-Planck operator.

The package maps the CEV forward operator onto the generalized Laguerre
operator, evaluates spectra, eigenfunctions and self-adjoint extensions in
every elasticity band, and cross-checks the arbitrage-side predictions
(absorption, Doob conditioning, strict-local-martingale defect) by Monte Carlo.
"""

from cevspec.errors import (
    CaseUncovered,
    CevError,
    ConfigInvalid,
    ExtensionNotApplicable,
    NoConvergence,
    ParameterPole,
    SingularGamma,
    WrongRegime,
)
from cevspec.params import (
    Band,
    DerivedParams,
    EndpointType,
    ModelParams,
    Regime,
    classify_regime,
    derive_params,
)

__version__ = "0.1.0"

__all__ = [
    "Band",
    "CaseUncovered",
    "CevError",
    "ConfigInvalid",
    "DerivedParams",
    "EndpointType",
    "ExtensionNotApplicable",
    "ModelParams",
    "NoConvergence",
    "ParameterPole",
    "Regime",
    "SingularGamma",
    "WrongRegime",
    "classify_regime",
    "derive_params",
]
