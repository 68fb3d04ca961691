"""Network-guided penalized regression.

Estimate a sparse Gaussian graphical model over the predictors, keep the
most central ones (hubs) and the confounders unpenalised, and select among
the remaining predictors with an adaptive Lasso.
"""

__version__ = "0.1.0"

from .data import Dataset
from .ggm import (
    EbicConfig,
    empirical_covariance,
    ebic_score,
    graphical_lasso,
    partial_correlations,
    select_precision_by_ebic,
)
from .metrics import calibration_slope, f1_score, mcc, rmse, selection_confusion
from .network import default_tau, degree_centrality, select_hubs
from .pipeline import fit_network_guided
from .regression import (
    PenaltySpec,
    adaptive_weights,
    build_design,
    cross_validate,
    fit_baseline,
    pilot_estimator,
    solve_partial_lasso,
)

__all__ = [
    "Dataset",
    "EbicConfig",
    "PenaltySpec",
    "adaptive_weights",
    "build_design",
    "calibration_slope",
    "cross_validate",
    "default_tau",
    "degree_centrality",
    "ebic_score",
    "empirical_covariance",
    "f1_score",
    "fit_baseline",
    "fit_network_guided",
    "graphical_lasso",
    "mcc",
    "partial_correlations",
    "pilot_estimator",
    "rmse",
    "select_hubs",
    "select_precision_by_ebic",
    "selection_confusion",
    "solve_partial_lasso",
]
