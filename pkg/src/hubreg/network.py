"""Degree centrality and the hub / non-hub split."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ggm import PartialCorrelationMatrix


@dataclass(frozen=True)
class CentralityVector:
    phi: np.ndarray


@dataclass(frozen=True)
class HubPartition:
    delta: float
    tau: int
    h: int
    hub_indices: tuple[int, ...]
    nonhub_indices: tuple[int, ...]
    phi: np.ndarray | None = None

    @property
    def p(self) -> int:
        return len(self.hub_indices) + len(self.nonhub_indices)

    def to_dict(self, names=None) -> dict:
        names = list(names) if names is not None else [f"X{j + 1}" for j in range(self.p)]
        phi = self.phi if self.phi is not None else np.full(self.p, np.nan)
        return {
            "delta": self.delta,
            "tau": self.tau,
            "h": self.h,
            "hubs": [
                {"index": j, "name": names[j], "centrality": float(phi[j])}
                for j in self.hub_indices
            ],
            "nonhub_indices": list(self.nonhub_indices),
        }


def degree_centrality(rho) -> CentralityVector:
    """Sum of absolute partial correlations per node, diagonal excluded."""
    if isinstance(rho, PartialCorrelationMatrix):
        rho = rho.rho
    rho = np.asarray(rho, dtype=float)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("rho must be a square matrix")
    a = np.abs(rho)
    phi = a.sum(axis=0) - np.diag(a)
    return CentralityVector(phi=phi)


def default_tau(p: int) -> int:
    """Hub cap ``floor((p + 20) / 16)``."""
    if p < 1:
        raise ValueError("p must be positive")
    return (p + 20) // 16


def hub_count(p: int, delta: float, tau: int) -> int:
    """``min(floor(p * delta), tau)``.

    A relative guard of 1e-9 keeps products such as ``100 * 0.29`` from
    flooring one below the intended integer.
    """
    return min(math.floor(p * delta * (1 + 1e-9)), tau)


def select_hubs(phi, delta: float, tau: int | None = None) -> HubPartition:
    """Take the ``h`` most central nodes as hubs.

    Ties in centrality go to the smaller column index. ``delta = 0`` is
    accepted and yields an empty hub set.
    """
    if isinstance(phi, CentralityVector):
        phi = phi.phi
    phi = np.asarray(phi, dtype=float)
    p = phi.size
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"delta must lie in [0, 1), got {delta}")
    if tau is None:
        tau = default_tau(p)
    if tau < 0:
        raise ValueError("tau must be non-negative")
    h = hub_count(p, delta, tau)
    # lexsort keys: last is primary -> descending phi, then ascending index
    order = np.lexsort((np.arange(p), -phi))
    hubs = tuple(sorted(int(j) for j in order[:h]))
    hub_set = set(hubs)
    nonhubs = tuple(j for j in range(p) if j not in hub_set)
    return HubPartition(
        delta=float(delta), tau=int(tau), h=h, hub_indices=hubs, nonhub_indices=nonhubs, phi=phi
    )
