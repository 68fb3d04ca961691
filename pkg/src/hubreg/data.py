from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Dataset:
    """Outcome ``y`` (n,), confounders ``Z`` (n, c) and predictors ``X`` (n, p).

    ``mean`` optionally carries the noise-free conditional mean of ``y``;
    only simulated data has it.
    """

    y: np.ndarray
    Z: np.ndarray
    X: np.ndarray
    z_names: list[str] = field(default_factory=list)
    x_names: list[str] = field(default_factory=list)
    mean: np.ndarray | None = None

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float).reshape(-1)
        n = self.y.shape[0]
        Z = np.asarray(self.Z, dtype=float)
        if Z.ndim != 2:
            Z = Z.reshape(n, -1) if Z.size else np.empty((n, 0))
        self.Z = Z
        self.X = np.asarray(self.X, dtype=float)
        if self.X.ndim != 2:
            raise ValueError("X must be 2-D")
        if self.Z.shape[0] != n or self.X.shape[0] != n:
            raise ValueError(
                f"row counts differ: y has {n}, Z has {self.Z.shape[0]}, X has {self.X.shape[0]}"
            )
        for label, arr in (("y", self.y), ("Z", self.Z), ("X", self.X)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{label} contains non-finite values")
        if not self.z_names:
            self.z_names = [f"Z{j + 1}" for j in range(self.c)]
        if not self.x_names:
            self.x_names = [f"X{j + 1}" for j in range(self.p)]
        if len(self.z_names) != self.c or len(self.x_names) != self.p:
            raise ValueError("column name count does not match data")

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def c(self) -> int:
        return self.Z.shape[1]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        return Dataset(
            y=self.y[rows],
            Z=self.Z[rows],
            X=self.X[rows],
            z_names=list(self.z_names),
            x_names=list(self.x_names),
            mean=None if self.mean is None else self.mean[rows],
        )
