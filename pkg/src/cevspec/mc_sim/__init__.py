"""Monte Carlo checks of absorption, conditioning and the martingale defect."""

from cevspec.mc_sim.config import EstimateCI, Measure, PathEnsemble, Scheme, SimConfig, mean_ci
from cevspec.mc_sim.engine import block_rng, simulate
from cevspec.mc_sim.estimators import (
    DoobCheck,
    DoobSamples,
    absorption_probability,
    density_process,
    doob_law_check,
    doob_samples,
    doob_statistic,
    expected_density,
    gbm_weak_bias,
    martingale_defect,
    weighted_ks,
)

__all__ = [
    "DoobCheck", "DoobSamples", "EstimateCI", "Measure", "PathEnsemble", "Scheme", "SimConfig",
    "absorption_probability", "block_rng", "density_process", "doob_law_check", "doob_samples", "doob_statistic",
    "expected_density", "gbm_weak_bias", "martingale_defect", "mean_ci",
    "simulate", "weighted_ks",
]
