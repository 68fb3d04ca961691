"""CSV ingestion, run configuration and JSON analysis reports.

CSV files are comma-separated UTF-8 with a mandatory header row and ``.``
as decimal separator. Numbers are written with ``repr`` so a dataset
survives an export/ingest round trip bit for bit.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .data import Dataset
from .ggm import EbicConfig, partial_correlations, select_precision_by_ebic
from .metrics import calibration_slope, rmse
from .network import degree_centrality, select_hubs
from .pipeline import StageError
from .regression import DEFAULT_NU_GRID, FittedModel, build_design, cross_validate


class ValidationError(ValueError):
    """Bad input file, column list or configuration."""


def _read_rows(path):
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"{path}: no such file")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        seen = set()
        for h in header:
            if h in seen:
                raise ValidationError(f"{path}: duplicate column name {h!r}")
            seen.add(h)
        return header, list(reader)


def ingest_csv(path, outcome_column: str, confounder_columns, protein_columns) -> Dataset:
    """Read a dataset with declared column roles.

    Row numbers in error messages count data rows from 1 (the header is
    row 0). Empty cells and non-numeric or non-finite values are rejected.
    """
    header, rows = _read_rows(path)
    confounder_columns = list(confounder_columns)
    protein_columns = list(protein_columns)
    wanted = [outcome_column, *confounder_columns, *protein_columns]
    if len(set(wanted)) != len(wanted):
        raise ValidationError("a column is assigned more than one role")
    missing = [c for c in wanted if c not in header]
    if missing:
        raise ValidationError(f"{path}: missing column(s) {', '.join(map(repr, missing))}")
    if not protein_columns:
        raise ValidationError("at least one protein column is required")
    idx = [header.index(c) for c in wanted]
    out = np.empty((len(rows), len(wanted)))
    for i, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise ValidationError(f"{path}: row {i} has {len(row)} fields, header has {len(header)}")
        for k, j in enumerate(idx):
            cell = row[j].strip()
            if cell == "":
                raise ValidationError(f"{path}: row {i}, column {header[j]!r}: missing value")
            try:
                v = float(cell)
            except ValueError:
                raise ValidationError(f"{path}: row {i}, column {header[j]!r}: non-numeric value {cell!r}") from None
            if not math.isfinite(v):
                raise ValidationError(f"{path}: row {i}, column {header[j]!r}: non-finite value {cell!r}")
            out[i - 1, k] = v
    if len(rows) == 0:
        raise ValidationError(f"{path}: no data rows")
    c = len(confounder_columns)
    return Dataset(
        y=out[:, 0],
        Z=out[:, 1 : 1 + c],
        X=out[:, 1 + c :],
        z_names=confounder_columns,
        x_names=protein_columns,
    )


def export_csv(dataset: Dataset, path, outcome_column: str = "y") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([outcome_column, *dataset.z_names, *dataset.x_names])
        for i in range(dataset.n):
            w.writerow([repr(float(v)) for v in (dataset.y[i], *dataset.Z[i], *dataset.X[i])])


def write_matrix_csv(path, matrix, names) -> None:
    """Dense square matrix with a header row of variable names."""
    m = np.asarray(matrix, dtype=float)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(list(names))
        for row in m:
            w.writerow([repr(float(v) + 0.0) for v in row])


@dataclass
class RunConfig:
    """Every knob of a single analysis run.

    Only ``outcome``, ``confounders`` and ``proteins`` are needed in a
    config file; the rest have defaults. Grids left as ``None`` are built
    from the data.
    """

    outcome: str = "y"
    confounders: list[str] = field(default_factory=list)
    proteins: list[str] = field(default_factory=list)
    delta: float = 0.03
    tau_override: int | None = None
    gamma: float = 0.5
    folds: int = 5
    nu_grid: list[float] = field(default_factory=lambda: list(DEFAULT_NU_GRID))
    lambda_grid: list[float] | None = None
    glasso_lambda_grid: list[float] | None = None
    ebic_patience: int | None = None
    seed: int = 0
    standardize: bool = True
    test_fraction: float = 0.0

    def __post_init__(self):
        if not 0 <= self.delta < 1:
            raise ValidationError("delta must lie in [0, 1)")
        if self.tau_override is not None and self.tau_override < 0:
            raise ValidationError("tau_override must be non-negative")
        if self.gamma < 0:
            raise ValidationError("gamma must be non-negative")
        if self.folds not in (5, 10):
            raise ValidationError("folds must be 5 or 10")
        if not self.nu_grid or any(v <= 0 for v in self.nu_grid):
            raise ValidationError("nu_grid entries must be positive")
        for name in ("lambda_grid", "glasso_lambda_grid"):
            g = getattr(self, name)
            if g is None:
                continue
            if not g or any(v <= 0 for v in g) or any(b >= a for a, b in zip(g, g[1:])):
                raise ValidationError(f"{name} must be positive and strictly decreasing")
        if not 0 <= self.test_fraction < 1:
            raise ValidationError("test_fraction must lie in [0, 1)")

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        extra = sorted(set(d) - known)
        if extra:
            raise ValidationError(f"unknown config key(s): {', '.join(extra)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ValidationError(str(exc)) from None

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                d = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"{path}: {exc}") from None
        if not isinstance(d, dict):
            raise ValidationError(f"{path}: config must be a JSON object")
        return cls.from_dict(d)

    def to_dict(self) -> dict:
        return asdict(self)


def _split(n: int, fraction: float, seed):
    """Train/test row split; ``fraction == 0`` keeps every row for training."""
    if fraction == 0:
        return np.arange(n), None
    rng = np.random.default_rng([int(seed), 2])
    perm = rng.permutation(n)
    n_test = max(3, int(round(fraction * n)))
    if n - n_test < 10:
        raise ValidationError("held-out split leaves too few training rows")
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except Exception as exc:
        raise StageError(name, exc) from exc


def run_pipeline(dataset: Dataset, config: RunConfig) -> dict:
    """Network estimation, hub selection and the partially penalised fit.

    Returns a JSON-ready report. Failures are raised as :class:`StageError`
    carrying the stage name.
    """
    train_rows, test_rows = _split(dataset.n, config.test_fraction, config.seed)
    train = dataset.subset(train_rows) if test_rows is not None else dataset
    ebic = EbicConfig(gamma=config.gamma, lambda_grid=config.glasso_lambda_grid, patience=config.ebic_patience)
    sel = _stage("network", select_precision_by_ebic, train.X, ebic, standardize=config.standardize)
    rho = _stage("partial-correlation", partial_correlations, sel.fit)
    phi = _stage("centrality", degree_centrality, rho)
    part = _stage("hubs", select_hubs, phi, config.delta, config.tau_override)
    design = _stage("design", build_design, train, part)
    cv = _stage(
        "cross-validation", cross_validate, design, train.y, config.nu_grid, config.lambda_grid, config.folds, config.seed
    )
    model = FittedModel("network_guided", design, cv.fit, cv)
    intercept, zeta, eta = model.coefficients()

    hubs = set(part.hub_indices)
    coef = [{"term": "(intercept)", "role": "intercept", "estimate": intercept}]
    coef += [{"term": nm, "role": "confounder", "estimate": float(v)} for nm, v in zip(dataset.z_names, zeta)]
    coef += [
        {"term": nm, "role": "hub" if j in hubs else "non-hub", "estimate": float(eta[j])}
        for j, nm in enumerate(dataset.x_names)
    ]
    active = [dataset.x_names[j] for j in part.nonhub_indices if abs(eta[j]) > 1e-8]
    report = {
        "n": train.n,
        "c": dataset.c,
        "p": dataset.p,
        "config": config.to_dict(),
        "network": {
            "lambda": sel.lam,
            "edges": sel.fit.edge_count,
            "converged": sel.fit.converged,
            "ebic_grid": [float(v) for v in sel.lambda_grid],
            "ebic_scores": [_num(v) for v in sel.scores],
        },
        "hubs": {
            "delta": part.delta,
            "tau": part.tau,
            "h": part.h,
            "names": [dataset.x_names[j] for j in part.hub_indices],
            "centrality": {dataset.x_names[j]: float(phi.phi[j]) for j in part.hub_indices},
        },
        "coefficients": coef,
        "active_nonhubs": active,
        "tuning": {
            "nu": cv.chosen[0],
            "lambda_n": cv.chosen[1],
            "folds": cv.folds,
            "cv_error_min": float(np.min(cv.cv_error)),
        },
        "kkt": {k: _num(v) for k, v in cv.fit.kkt.items()},
        "solver_converged": cv.fit.converged,
    }
    if test_rows is not None:
        test = dataset.subset(test_rows)
        pred_tr = model.predict(train.Z, train.X)
        pred_te = model.predict(test.Z, test.X)
        report["evaluation"] = {
            "train_rmse": rmse(train.y, pred_tr),
            "test_rmse": rmse(test.y, pred_te),
            "train_csl": calibration_slope(train.y, pred_tr),
            "test_csl": calibration_slope(test.y, pred_te),
            "n_test": int(test_rows.size),
        }
    return report


def _num(v):
    v = float(v)
    return v if math.isfinite(v) else None


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
