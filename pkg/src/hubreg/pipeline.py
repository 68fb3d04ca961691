"""End-to-end network-guided fit: network -> hubs -> partially penalised adaptive Lasso."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import Dataset
from .ggm import EbicConfig, EbicSelection, PartialCorrelationMatrix, partial_correlations, select_precision_by_ebic
from .network import CentralityVector, HubPartition, degree_centrality, select_hubs
from .regression import DEFAULT_NU_GRID, FittedModel, build_design, cross_validate


class StageError(RuntimeError):
    """Wraps a failure with the name of the pipeline stage that raised it."""

    def __init__(self, stage: str, exc: Exception):
        super().__init__(f"[{stage}] {exc}")
        self.stage = stage
        self.cause = exc


@dataclass
class NetworkGuidedFit:
    selection: EbicSelection
    rho: PartialCorrelationMatrix
    centrality: CentralityVector
    partition: HubPartition
    model: FittedModel

    def predict(self, Z, X) -> np.ndarray:
        return self.model.predict(Z, X)

    def coefficients(self):
        return self.model.coefficients()


def estimate_network(
    X, gamma: float = 0.5, lambda_grid=None, patience: int | None = None
) -> tuple[EbicSelection, PartialCorrelationMatrix, CentralityVector]:
    sel = select_precision_by_ebic(X, EbicConfig(gamma=gamma, lambda_grid=lambda_grid, patience=patience))
    rho = partial_correlations(sel.fit)
    return sel, rho, degree_centrality(rho)


def fit_network_guided(
    dataset: Dataset,
    delta: float,
    tau: int | None = None,
    *,
    gamma: float = 0.5,
    folds: int = 5,
    seed=0,
    nu_grid: Sequence[float] = DEFAULT_NU_GRID,
    lambda_grid: Sequence[float] | None = None,
    glasso_lambda_grid=None,
    ebic_patience: int | None = None,
    network=None,
) -> NetworkGuidedFit:
    """Run every stage on one dataset.

    ``network`` may carry a precomputed ``(selection, rho, centrality)``
    triple so several ``delta`` values can share one graph estimate.
    """
    stage = "network"
    try:
        if network is None:
            network = estimate_network(dataset.X, gamma, glasso_lambda_grid, ebic_patience)
        sel, rho, phi = network
        stage = "hubs"
        part = select_hubs(phi, delta, tau)
        stage = "design"
        design = build_design(dataset, part)
        stage = "cross-validation"
        cv = cross_validate(design, dataset.y, nu_grid, lambda_grid, folds, seed)
    except Exception as exc:
        raise StageError(stage, exc) from exc
    model = FittedModel("network_guided", design, cv.fit, cv)
    return NetworkGuidedFit(selection=sel, rho=rho, centrality=phi, partition=part, model=model)
