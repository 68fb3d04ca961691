"""Synthetic benchmark: scenario generation, replicate runs and summaries."""

from __future__ import annotations

import csv
import logging
import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .data import Dataset
from .metrics import MetricsReport, evaluate, summarize_rows

logger = logging.getLogger(__name__)

TEST_SIZE = 1000
MU = 0.5
ZETA = (2.5, 2.5, 2.5)
JOBS_ENV = "HUBREG_JOBS"


def strong_eta(p: int) -> np.ndarray:
    if p < 15:
        raise ValueError("strong-signal scenario needs p >= 15")
    eta = np.zeros(p)
    eta[0:5] = 3.5
    eta[10:15] = -1.5
    return eta


def weak_eta(p: int) -> np.ndarray:
    if p < 8:
        raise ValueError("weak-signal scenario needs p >= 8")
    eta = np.zeros(p)
    eta[:8] = [1.0, -0.8, 0.6, 0.0, 0.0, -1.5, -0.5, 1.2]
    return eta


def build_covariance(p: int, rho: float = 0.9, block: int = 4, floor: float = 1e-8) -> np.ndarray:
    """Correlation matrix with an equicorrelated leading block and AR(1) decay elsewhere.

    ``Sigma_jk = rho`` when both indices fall in the first ``block``
    variables and ``rho ** |j - k|`` otherwise. If the result is not
    comfortably positive definite the eigenvalues are clipped at ``floor``
    and the matrix is rescaled back to unit diagonal.
    """
    if p < 5:
        raise ValueError("p must be at least 5")
    idx = np.arange(p)
    S = rho ** np.abs(idx[:, None] - idx[None, :])
    b = min(block, p)
    S[:b, :b] = rho
    np.fill_diagonal(S, 1.0)
    vals, vecs = np.linalg.eigh(S)
    if vals.min() <= floor:
        S = (vecs * np.maximum(vals, floor)) @ vecs.T
        d = np.sqrt(np.diag(S))
        S = S / np.outer(d, d)
        S = 0.5 * (S + S.T)
    return S


@dataclass
class Scenario:
    n: int
    p: int
    signal: str = "strong"
    sigma: float = 1.0
    mu: float = MU
    zeta: np.ndarray = field(default_factory=lambda: np.array(ZETA))
    eta: np.ndarray | None = None
    covariance: np.ndarray | None = None
    seed: int = 0

    def __post_init__(self):
        if self.signal not in ("strong", "weak"):
            raise ValueError("signal must be 'strong' or 'weak'")
        self.zeta = np.asarray(self.zeta, dtype=float)
        if self.eta is None:
            self.eta = strong_eta(self.p) if self.signal == "strong" else weak_eta(self.p)
        self.eta = np.asarray(self.eta, dtype=float)
        if self.covariance is None:
            self.covariance = build_covariance(self.p)

    @property
    def label(self) -> str:
        return f"{self.signal} n={self.n} p={self.p}"

    def with_seed(self, seed) -> "Scenario":
        return Scenario(
            n=self.n, p=self.p, signal=self.signal, sigma=self.sigma, mu=self.mu,
            zeta=self.zeta, eta=self.eta, covariance=self.covariance, seed=seed,
        )


def _draw(scenario: Scenario, n: int, rng: np.random.Generator, chol) -> Dataset:
    X = rng.standard_normal((n, scenario.p)) @ chol.T
    Z = np.column_stack([
        rng.uniform(0.0, 1.0, n),
        rng.binomial(1, 0.25, n),
        rng.binomial(1, 0.65, n),
    ]).astype(float)
    mean = scenario.mu + Z @ scenario.zeta + X @ scenario.eta
    y = mean + scenario.sigma * rng.standard_normal(n)
    return Dataset(y=y, Z=Z, X=X, mean=mean)


def generate_dataset(scenario: Scenario, test_size: int = TEST_SIZE) -> tuple[Dataset, Dataset]:
    """Draw a training set of ``scenario.n`` rows and an independent test set.

    Both come from ``Y = mu + Z zeta + X eta + eps`` with ``X ~ N(0, Sigma)``,
    ``Z1 ~ U(0, 1)``, ``Z2 ~ Bernoulli(0.25)``, ``Z3 ~ Bernoulli(0.65)``.
    The two sets use disjoint child streams of ``scenario.seed``.
    """
    chol = np.linalg.cholesky(scenario.covariance)
    train_ss, test_ss = np.random.SeedSequence(scenario.seed).spawn(2)
    train = _draw(scenario, scenario.n, np.random.default_rng(train_ss), chol)
    test = _draw(scenario, test_size, np.random.default_rng(test_ss), chol)
    return train, test


@dataclass
class HarnessSettings:
    """Knobs shared by every replicate of an experiment."""

    gamma: float = 0.5
    ebic_patience: int | None = 5
    include_confounders: bool = True
    nu_grid: tuple[float, ...] = (0.5, 1.0, 2.0)
    test_size: int = TEST_SIZE


@dataclass
class ReplicateSummary:
    scenario: str
    replicates: int
    rows: list[dict]
    failures: list[dict]
    summary: list[dict]
    manifest: dict = field(default_factory=dict)

    def method(self, label: str) -> dict:
        for s in self.summary:
            if s["method"] == label:
                return s
        raise KeyError(label)


def ng_label(delta: float) -> str:
    return f"NG(delta={delta:g})"


def replicate_seed(master, r: int) -> list[int]:
    return [*np.atleast_1d(master).tolist(), int(r)]


def _row(label, setting, r, report: MetricsReport, exact_support: bool) -> dict:
    return {
        "method": label,
        "setting": setting,
        "replicate": r,
        "rmse": report.rmse,
        "csl": report.csl,
        "f1": report.f1,
        "mcc": report.mcc,
        "exact_support": exact_support,
    }


def run_replicate(scenario: Scenario, r: int, methods, deltas, folds: int, settings: HarnessSettings):
    """One train/test draw evaluated for every requested method.

    Returns ``(rows, failures)``. A method that raises is recorded as a
    failure for this replicate and does not stop the others.
    """
    from .pipeline import estimate_network, fit_network_guided
    from .regression import fit_baseline

    seed = replicate_seed(scenario.seed, r)
    sc = scenario.with_seed(seed)
    train, test = generate_dataset(sc, settings.test_size)
    truth = np.concatenate([sc.zeta, sc.eta]) if settings.include_confounders else sc.eta
    cv_seed = seed + [1]
    rows, failures = [], []

    def score(label, model, hubs=()):
        intercept, zeta, eta = model.coefficients()
        pred = model.predict(test.Z, test.X)
        est = np.concatenate([zeta, eta]) if settings.include_confounders else eta
        report = evaluate(test.mean, test.y, pred, est, truth)
        free = [j for j in range(sc.p) if j not in set(hubs)]
        exact = bool(np.array_equal(np.abs(eta[free]) > 1e-8, sc.eta[free] != 0))
        rows.append(_row(label, sc.label, r, report, exact))

    wants_ng = "ng" in methods and len(deltas) > 0
    network = None
    if wants_ng:
        try:
            network = estimate_network(train.X, settings.gamma, None, settings.ebic_patience)
        except Exception as exc:  # recorded, never dropped silently
            for d in deltas:
                failures.append({"method": ng_label(d), "replicate": r, "error": repr(exc)})
    for m in methods:
        if m == "ng":
            if network is None:
                continue
            for d in deltas:
                try:
                    fit = fit_network_guided(
                        train, d, gamma=settings.gamma, folds=folds, seed=cv_seed,
                        nu_grid=settings.nu_grid, network=network,
                    )
                    score(ng_label(d), fit.model, fit.partition.hub_indices)
                except Exception as exc:
                    logger.debug(traceback.format_exc())
                    failures.append({"method": ng_label(d), "replicate": r, "error": repr(exc)})
        else:
            try:
                model = fit_baseline(m, train.Z, train.X, train.y, folds=folds, seed=cv_seed)
                score(m, model)
            except Exception as exc:
                logger.debug(traceback.format_exc())
                failures.append({"method": m, "replicate": r, "error": repr(exc)})
    return rows, failures


def _job_count(n_jobs):
    if n_jobs is not None:
        return max(1, int(n_jobs))
    return max(1, int(os.environ.get(JOBS_ENV, "1")))


def method_labels(methods, deltas) -> list[str]:
    out = []
    for m in methods:
        out += [ng_label(d) for d in deltas] if m == "ng" else [m]
    return out


def aggregate(rows, failures, labels, setting) -> list[dict]:
    """Per-method mean/SD in ``labels`` order with failure counts alongside."""
    out = []
    for label in labels:
        mine = [r for r in rows if r["method"] == label]
        s = {"method": label, "setting": setting}
        s.update(summarize_rows(mine))
        s["failures"] = sum(1 for f in failures if f["method"] == label)
        out.append(s)
    return out


def run_experiment(
    scenario: Scenario,
    methods=("ng", "adaptive_lasso", "lasso", "elastic_net", "ridge"),
    delta_list=(0.06,),
    replicates: int = 100,
    folds: int = 5,
    settings: HarnessSettings | None = None,
    n_jobs: int | None = None,
) -> ReplicateSummary:
    """Run ``replicates`` independent train/test draws and aggregate.

    Replicate ``r`` draws from the seed sequence ``(scenario.seed, r)``, so
    results do not depend on scheduling. ``n_jobs`` (or the ``HUBREG_JOBS``
    environment variable) sets the process-pool size.
    """
    if replicates < 1:
        raise ValueError("replicates must be at least 1")
    settings = settings or HarnessSettings()
    methods = list(methods)
    deltas = [float(d) for d in delta_list]
    jobs = _job_count(n_jobs)
    args = [(scenario, r, methods, deltas, folds, settings) for r in range(replicates)]
    if jobs == 1:
        results = [run_replicate(*a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_replicate, *zip(*args)))
    rows = [row for res in results for row in res[0]]
    failures = [f for res in results for f in res[1]]
    labels = method_labels(methods, deltas)
    return ReplicateSummary(
        scenario=scenario.label,
        replicates=replicates,
        rows=rows,
        failures=failures,
        summary=aggregate(rows, failures, labels, scenario.label),
        manifest=_manifest(scenario, methods, deltas, replicates, folds, settings),
    )


def _manifest(scenario, methods, deltas, replicates, folds, settings) -> dict:
    import numba
    import scipy

    from . import __version__

    return {
        "scenario": {
            "n": scenario.n, "p": scenario.p, "signal": scenario.signal, "sigma": scenario.sigma,
            "mu": scenario.mu, "zeta": scenario.zeta.tolist(), "master_seed": np.atleast_1d(scenario.seed).tolist(),
        },
        "replicate_seeds": [replicate_seed(scenario.seed, r) for r in range(replicates)],
        "methods": methods,
        "deltas": deltas,
        "folds": folds,
        "settings": asdict(settings),
        "grids": {
            "glasso": "30 log-spaced values from max|S_jk| to 0.01*max",
            "lambda_n": "50 log-spaced values from lambda_max(nu) to 1e-3*lambda_max(nu)",
            "pilot_lambda1": "30 log-spaced values from lambda_max to 0.01*lambda_max",
            "nu": list(settings.nu_grid),
        },
        "versions": {"hubreg": __version__, "numpy": np.__version__, "scipy": scipy.__version__, "numba": numba.__version__},
    }


def write_rows_csv(path, rows) -> None:
    from .metrics import METRIC_COLUMNS

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(METRIC_COLUMNS)
        for r in rows:
            w.writerow([_cell(r[k]) for k in METRIC_COLUMNS])


def write_summary_csv(path, summary) -> None:
    cols = ["method", "setting", "replicates", "failures"]
    for k in ("rmse", "csl", "f1", "mcc"):
        cols += [f"{k}_mean", f"{k}_sd", f"{k}_undefined"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for s in summary:
            w.writerow([_cell(s.get(c)) for c in cols])


def _cell(v):
    if v is None:
        return "NA"
    if isinstance(v, float):
        return repr(v)
    return v
