"""Partially penalised least squares.

The model is ``y = U alpha + N beta + eps`` with ``U = [1 | Z | X_hubs]``
left unpenalised and the non-hub block ``N`` carrying a weighted l1 (and
optionally l2) penalty::

    L(alpha, beta) = ||y - U alpha - N beta||^2
                     + sum_j l1_j |beta_j| + l2 ||beta||^2

There is no ``1/(2n)`` factor, so the coordinate update soft-thresholds at
``l1_j / 2``. ``alpha`` is profiled out exactly: ``N`` and ``y`` are projected
onto the orthogonal complement of ``U`` once (thin QR of ``U``), coordinate
descent runs on the projected problem, and ``alpha`` is recovered by a
triangular solve.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import linalg

from ._kernels import enet_cd, kkt_violation
from .data import Dataset
from .network import HubPartition

logger = logging.getLogger(__name__)

ZERO_THRESHOLD = 1e-8
DEFAULT_NU_GRID = (0.5, 1.0, 2.0)
ENET_MIXING = 0.5
METHODS = ("lasso", "adaptive_lasso", "elastic_net", "ridge")


class RankDeficientError(ValueError):
    """The unpenalised block ``U`` does not have full column rank."""


@dataclass
class DesignPartition:
    """Unpenalised block ``U`` and penalised block ``N`` plus the records
    needed to map coefficients back to the original predictor scale.

    ``U`` columns after the intercept are centred; ``N`` columns are
    centred and scaled to unit variance. Constant non-hub columns are
    dropped and listed in ``dropped``.
    """

    U: np.ndarray
    N: np.ndarray
    u_names: list[str]
    n_names: list[str]
    hub_columns: tuple[int, ...] = ()
    nonhub_columns: tuple[int, ...] = ()
    dropped: tuple[int, ...] = ()
    u_mean: np.ndarray | None = None
    n_mean: np.ndarray | None = None
    n_scale: np.ndarray | None = None
    c: int = 0
    p: int = 0

    def __post_init__(self):
        self.U = np.asarray(self.U, dtype=float)
        self.N = np.asarray(self.N, dtype=float).reshape(self.U.shape[0], -1)
        if self.u_mean is None:
            self.u_mean = np.zeros(self.t)
        if self.n_mean is None:
            self.n_mean = np.zeros(self.q)
        if self.n_scale is None:
            self.n_scale = np.ones(self.q)

    @classmethod
    def from_blocks(cls, U, N) -> "DesignPartition":
        """Wrap raw blocks; no scaling records, no column bookkeeping."""
        U = np.asarray(U, dtype=float)
        N = np.asarray(N, dtype=float).reshape(U.shape[0], -1)
        return cls(
            U=U,
            N=N,
            u_names=[f"u{j}" for j in range(U.shape[1])],
            n_names=[f"n{j}" for j in range(N.shape[1])],
            nonhub_columns=tuple(range(N.shape[1])),
            p=N.shape[1],
        )

    @property
    def n(self) -> int:
        return self.U.shape[0]

    @property
    def t(self) -> int:
        return self.U.shape[1]

    @property
    def q(self) -> int:
        return self.N.shape[1]

    def rows(self, idx) -> "DesignPartition":
        """Same partition restricted to a subset of observations."""
        return DesignPartition(
            U=self.U[idx],
            N=self.N[idx],
            u_names=self.u_names,
            n_names=self.n_names,
            hub_columns=self.hub_columns,
            nonhub_columns=self.nonhub_columns,
            dropped=self.dropped,
            u_mean=self.u_mean,
            n_mean=self.n_mean,
            n_scale=self.n_scale,
            c=self.c,
            p=self.p,
        )

    def transform(self, Z, X):
        """Build ``(U, N)`` for new data with the stored centring and scaling."""
        X = np.asarray(X, dtype=float)
        Z = np.asarray(Z, dtype=float).reshape(X.shape[0], -1)
        raw_u = np.column_stack([Z, X[:, list(self.hub_columns)]])
        U = np.column_stack([np.ones(X.shape[0]), raw_u - self.u_mean[1:]])
        N = (X[:, list(self.nonhub_columns)] - self.n_mean) / self.n_scale
        return U, N


@dataclass
class PenaltySpec:
    lambda_n: float
    weights: np.ndarray
    nu: float | None = None
    l2: float = 0.0

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if self.lambda_n < 0:
            raise ValueError("lambda_n must be non-negative")
        if self.l2 < 0:
            raise ValueError("l2 must be non-negative")
        if self.nu is not None and self.nu <= 0:
            raise ValueError("nu must be positive")
        if not np.all(np.isfinite(self.weights)) or np.any(self.weights < 0):
            raise ValueError("weights must be finite and non-negative")

    @property
    def l1(self) -> np.ndarray:
        return self.lambda_n * self.weights


@dataclass
class PartialFitResult:
    alpha: np.ndarray
    beta: np.ndarray
    active_set: tuple[int, ...]
    penalty: PenaltySpec
    residual_variance: float
    converged: bool
    iterations: int = 0
    kkt: dict = field(default_factory=dict)


@dataclass
class CvResult:
    grid: list[tuple[float | None, float]]
    cv_error: np.ndarray
    cv_se: np.ndarray
    chosen: tuple[float | None, float]
    folds: int
    fit: PartialFitResult | None = None
    pilot: np.ndarray | None = None


class _Projected:
    """Penalised block and response with ``U`` projected out."""

    def __init__(self, U, N, y):
        self.U = np.asarray(U, dtype=float)
        self.N = np.asarray(N, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.Q, self.R = np.linalg.qr(self.U)
        d = np.abs(np.diag(self.R))
        if d.size and d.min() <= 1e-10 * max(d.max(), 1.0):
            raise RankDeficientError(
                "the unpenalised block U = (1, Z, hubs) is rank deficient; "
                "reduce the number of hubs or confounders"
            )
        Nt = self.N - self.Q @ (self.Q.T @ self.N)
        self.Nt = np.asfortranarray(Nt)
        self.yt = self.y - self.Q @ (self.Q.T @ self.y)
        self.col_sq = np.einsum("ij,ij->j", Nt, Nt)
        self._svd = None

    @property
    def q(self) -> int:
        return self.Nt.shape[1]

    def score(self) -> np.ndarray:
        """Gradient magnitude ``2 |N_j' (y - U alpha_hat)|`` at ``beta = 0``."""
        return 2.0 * np.abs(self.Nt.T @ self.yt)

    def lambda_max(self, weights) -> float:
        w = np.asarray(weights, dtype=float)
        s = self.score()
        ok = w > 0
        if not ok.any() or s.size == 0:
            return 0.0
        return float(np.max(s[ok] / w[ok]))

    def _exact_l2(self, l2):
        if self._svd is None:
            self._svd = np.linalg.svd(self.Nt, full_matrices=False)
        Us, s, Vt = self._svd
        if l2 > 0:
            f = s / (s**2 + l2)
        else:
            cut = s > s.max(initial=0.0) * max(self.Nt.shape) * np.finfo(float).eps
            f = np.where(cut, 1.0 / np.where(cut, s, 1.0), 0.0)
        return Vt.T @ (f * (Us.T @ self.yt))

    def solve(self, l1, l2=0.0, beta0=None, tol=1e-7, max_iter=100_000):
        l1 = np.ascontiguousarray(np.broadcast_to(np.asarray(l1, dtype=float), (self.q,)))
        if self.q == 0:
            return np.zeros(0), True, 0
        if not np.any(l1 > 0):
            return self._exact_l2(l2), True, 0
        beta = np.zeros(self.q) if beta0 is None else np.array(beta0, dtype=float)
        r = self.yt - self.Nt @ beta
        sweeps, ok = enet_cd(
            self.Nt, r, beta, self.col_sq, l1, float(l2), tol, max_iter, 10.0 * tol, ZERO_THRESHOLD
        )
        return beta, bool(ok), int(sweeps)

    def alpha(self, beta) -> np.ndarray:
        rhs = self.Q.T @ (self.y - self.N @ beta)
        return linalg.solve_triangular(self.R, rhs)


def build_design(dataset: Dataset, hubs: HubPartition | Sequence[int] = ()) -> DesignPartition:
    """Split predictors into ``U = [1 | Z | X_hubs]`` and the non-hub block ``N``."""
    hub_idx = tuple(hubs.hub_indices) if isinstance(hubs, HubPartition) else tuple(int(j) for j in hubs)
    p = dataset.p
    if any(j < 0 or j >= p for j in hub_idx):
        raise IndexError("hub index out of range")
    hub_set = set(hub_idx)
    rest = [j for j in range(p) if j not in hub_set]
    X = dataset.X
    sd = X[:, rest].std(axis=0) if rest else np.zeros(0)
    dropped = tuple(j for j, s in zip(rest, sd) if s <= 0)
    if dropped:
        names = ", ".join(dataset.x_names[j] for j in dropped)
        warnings.warn(f"dropping constant non-hub columns: {names}")
    nonhub = tuple(j for j, s in zip(rest, sd) if s > 0)

    raw_u = np.column_stack([dataset.Z, X[:, list(hub_idx)]]) if (dataset.c or hub_idx) else np.empty((dataset.n, 0))
    u_mean = np.concatenate([[0.0], raw_u.mean(axis=0)])
    U = np.column_stack([np.ones(dataset.n), raw_u - u_mean[1:]])
    N_raw = X[:, list(nonhub)]
    n_mean = N_raw.mean(axis=0)
    n_scale = N_raw.std(axis=0)
    N = (N_raw - n_mean) / n_scale if nonhub else np.empty((dataset.n, 0))
    return DesignPartition(
        U=U,
        N=N,
        u_names=["(intercept)"] + list(dataset.z_names) + [dataset.x_names[j] for j in hub_idx],
        n_names=[dataset.x_names[j] for j in nonhub],
        hub_columns=hub_idx,
        nonhub_columns=nonhub,
        dropped=dropped,
        u_mean=u_mean,
        n_mean=n_mean,
        n_scale=n_scale,
        c=dataset.c,
        p=p,
    )


def kkt_residuals(design: DesignPartition, y, fit: PartialFitResult) -> dict:
    """Worst-case violations of the three optimality conditions.

    ``unpenalized``: ``max |U' r|``; ``active``: ``max |2 N_j' r - 2 l2 b_j
    - l1_j sgn(b_j)|`` over non-zero ``b_j``; ``inactive``: ``max(|2 N_j' r|
    - l1_j)`` over zero ``b_j`` (non-positive when satisfied).
    """
    y = np.asarray(y, dtype=float)
    r = y - design.U @ fit.alpha - design.N @ fit.beta
    out = {"unpenalized": float(np.max(np.abs(design.U.T @ r), initial=0.0))}
    if design.q == 0:
        out.update(active=0.0, inactive=-np.inf)
        return out
    grad = 2.0 * design.N.T @ r - 2.0 * fit.penalty.l2 * fit.beta
    l1 = fit.penalty.l1
    nz = np.abs(fit.beta) > ZERO_THRESHOLD
    out["active"] = float(np.max(np.abs(grad[nz] - l1[nz] * np.sign(fit.beta[nz])), initial=0.0))
    out["inactive"] = float(np.max(np.abs(grad[~nz]) - l1[~nz], initial=-np.inf))
    return out


def _result(problem: _Projected, beta, penalty, converged, sweeps, design=None, y=None):
    alpha = problem.alpha(beta)
    active = tuple(int(j) for j in np.flatnonzero(np.abs(beta) > ZERO_THRESHOLD))
    r = problem.yt - problem.Nt @ beta
    dof = problem.y.size - problem.U.shape[1] - len(active)
    rss = float(r @ r)
    sigma2 = rss / dof if dof > 0 else rss / max(problem.y.size, 1)
    fit = PartialFitResult(
        alpha=alpha,
        beta=beta,
        active_set=active,
        penalty=penalty,
        residual_variance=sigma2,
        converged=converged,
        iterations=sweeps,
    )
    if design is not None:
        fit.kkt = kkt_residuals(design, y, fit)
    return fit


def solve_partial_lasso(
    design: DesignPartition,
    y,
    penalty: PenaltySpec,
    tol: float = 1e-7,
    max_iter: int = 100_000,
    beta_init=None,
) -> PartialFitResult:
    """Minimise the partially penalised objective for one penalty setting.

    Convergence requires a full sweep with every coefficient moving less
    than ``tol`` and the subgradient conditions holding to ``10 * tol``.
    A non-converged run returns its last iterate with ``converged=False``.
    """
    y = np.asarray(y, dtype=float)
    if penalty.weights.size != design.q:
        raise ValueError(f"expected {design.q} weights, got {penalty.weights.size}")
    problem = _Projected(design.U, design.N, y)
    beta, ok, sweeps = problem.solve(penalty.l1, penalty.l2, beta_init, tol, max_iter)
    if not ok:
        logger.warning("coordinate descent stopped after %d sweeps without converging", sweeps)
    return _result(problem, beta, penalty, ok, sweeps, design, y)


def objective(design: DesignPartition, y, alpha, beta, penalty: PenaltySpec) -> float:
    r = np.asarray(y, dtype=float) - design.U @ alpha - design.N @ beta
    return float(r @ r + np.sum(penalty.l1 * np.abs(beta)) + penalty.l2 * beta @ beta)


def adaptive_weights(pilot, nu: float, floor: float = 1e-6) -> np.ndarray:
    """``max(|pilot|, floor) ** -nu``."""
    if nu <= 0:
        raise ValueError("nu must be positive")
    if floor <= 0:
        raise ValueError("floor must be positive")
    return np.maximum(np.abs(np.asarray(pilot, dtype=float)), floor) ** (-nu)


def fold_assignment(n: int, folds: int, seed) -> np.ndarray:
    """Balanced random fold labels ``0..folds-1``."""
    if folds < 2 or folds > n:
        raise ValueError(f"cannot split {n} observations into {folds} folds")
    rng = np.random.default_rng(seed)
    return rng.permutation(np.arange(n) % folds)


def _fold_problem(design, y, train, k):
    try:
        return _Projected(design.U[train], design.N[train], y[train])
    except RankDeficientError as exc:
        raise RankDeficientError(f"fold {k}: {exc}") from exc


def _path(problem, lambdas, penalty_fn, tol, max_iter):
    betas = np.zeros((len(lambdas), problem.q))
    ok = np.ones(len(lambdas), dtype=bool)
    beta = None
    for i, lam in enumerate(lambdas):
        l1, l2 = penalty_fn(lam)
        beta, ok[i], _ = problem.solve(l1, l2, beta, tol, max_iter)
        betas[i] = beta
    return betas, ok


def _pick(errors, lambdas, nus=None) -> int:
    """Index of the minimum; ties -> larger lambda, then larger nu."""
    nus = np.zeros_like(lambdas) if nus is None else np.asarray(nus, dtype=float)
    order = np.lexsort((-nus, -np.asarray(lambdas), np.asarray(errors)))
    return int(order[0])


def _cv_fixed(design, y, lambdas, penalty_fn, folds, seed, tol, max_iter):
    y = np.asarray(y, dtype=float)
    labels = fold_assignment(design.n, folds, seed)
    errs = np.zeros((folds, len(lambdas)))
    for k in range(folds):
        train, test = labels != k, labels == k
        prob = _fold_problem(design, y, train, k)
        betas, _ = _path(prob, lambdas, penalty_fn, tol, max_iter)
        for i, beta in enumerate(betas):
            pred = design.U[test] @ prob.alpha(beta) + design.N[test] @ beta
            errs[k, i] = np.mean((y[test] - pred) ** 2)
    mean = errs.mean(axis=0)
    se = errs.std(axis=0, ddof=1) / np.sqrt(folds)
    return mean, se, _pick(mean, lambdas)


def pilot_estimator(
    design: DesignPartition,
    y,
    ridge_perturbation: float | None = None,
    lambda1: float | None = None,
    folds: int = 5,
    seed=0,
    n_lambda: int = 30,
    lambda_ratio: float = 1e-2,
    tol: float = 1e-7,
    max_iter: int = 100_000,
) -> np.ndarray:
    """Perturbed elastic-net estimate of ``beta`` used to build adaptive weights.

    Minimises ``||y - U a - N b||^2 + ridge ||b||^2 + lambda1 ||b||_1``. The
    ridge term defaults to ``1e-3 * lambda_max``; ``lambda1`` is chosen by
    ``folds``-fold CV over ``n_lambda`` log-spaced values from
    ``lambda_max`` down to ``lambda_ratio * lambda_max`` unless given.
    """
    y = np.asarray(y, dtype=float)
    problem = _Projected(design.U, design.N, y)
    if design.q == 0:
        return np.zeros(0)
    lmax = problem.lambda_max(np.ones(design.q))
    if ridge_perturbation is None:
        ridge_perturbation = 1e-3 * lmax if lmax > 0 else 1e-8
    if ridge_perturbation <= 0:
        raise ValueError("ridge_perturbation must be positive")
    ones = np.ones(design.q)

    def pen(lam):
        return lam * ones, ridge_perturbation

    if lambda1 is None:
        if lmax <= 0:
            return np.zeros(design.q)
        grid = np.geomspace(lmax, lambda_ratio * lmax, n_lambda)
        mean, _, best = _cv_fixed(design, y, grid, pen, folds, seed, tol, max_iter)
        betas, _ = _path(problem, grid[: best + 1], pen, tol, max_iter)
        return betas[-1]
    beta, _, _ = problem.solve(lambda1 * ones, ridge_perturbation, None, tol, max_iter)
    return beta


def cross_validate(
    design: DesignPartition,
    y,
    nu_grid: Sequence[float] = DEFAULT_NU_GRID,
    lambda_grid: Sequence[float] | None = None,
    folds: int = 5,
    seed=0,
    n_lambda: int = 50,
    lambda_ratio: float = 1e-3,
    floor: float = 1e-6,
    ridge_perturbation: float | None = None,
    tol: float = 1e-7,
    max_iter: int = 100_000,
) -> CvResult:
    """Choose ``(nu, lambda_n)`` for the adaptive penalty by K-fold CV and refit.

    On every training fold the pilot estimate (and with it the weights) is
    recomputed. Without an explicit ``lambda_grid`` each ``nu`` gets
    ``n_lambda`` log-spaced values from its own full-data ``lambda_max``
    down to ``lambda_ratio * lambda_max``. The chosen pair minimises the mean
    held-out squared error; ties go to the larger ``lambda_n``, then the
    larger ``nu``. The final model is refit on all rows with the pilot
    recomputed on all rows.
    """
    if folds not in (5, 10):
        raise ValueError("folds must be 5 or 10")
    nu_grid = [float(v) for v in nu_grid]
    if not nu_grid:
        raise ValueError("nu_grid must be non-empty")
    if lambda_grid is not None and len(lambda_grid) == 0:
        raise ValueError("lambda_grid must be non-empty")
    y = np.asarray(y, dtype=float)
    full = _Projected(design.U, design.N, y)
    pilot_kw = dict(ridge_perturbation=ridge_perturbation, tol=tol, max_iter=max_iter)
    pilot = pilot_estimator(design, y, seed=[*np.atleast_1d(seed), 99], **pilot_kw)

    grids = {}
    for nu in nu_grid:
        if lambda_grid is not None:
            grids[nu] = np.sort(np.asarray(lambda_grid, dtype=float))[::-1]
        else:
            lmax = full.lambda_max(adaptive_weights(pilot, nu, floor))
            grids[nu] = np.geomspace(lmax, lambda_ratio * lmax, n_lambda) if lmax > 0 else np.array([0.0])

    labels = fold_assignment(design.n, folds, seed)
    errs = {nu: np.zeros((folds, grids[nu].size)) for nu in nu_grid}
    for k in range(folds):
        train, test = labels != k, labels == k
        prob = _fold_problem(design, y, train, k)
        fold_pilot = pilot_estimator(design.rows(train), y[train], seed=[*np.atleast_1d(seed), k], **pilot_kw)
        for nu in nu_grid:
            w = adaptive_weights(fold_pilot, nu, floor)
            betas, _ = _path(prob, grids[nu], lambda lam: (lam * w, 0.0), tol, max_iter)
            for i, beta in enumerate(betas):
                pred = design.U[test] @ prob.alpha(beta) + design.N[test] @ beta
                errs[nu][k, i] = np.mean((y[test] - pred) ** 2)

    pairs, means, ses = [], [], []
    for nu in nu_grid:
        pairs += [(nu, float(lam)) for lam in grids[nu]]
        means.append(errs[nu].mean(axis=0))
        ses.append(errs[nu].std(axis=0, ddof=1) / np.sqrt(folds))
    means, ses = np.concatenate(means), np.concatenate(ses)
    best = _pick(means, [lam for _, lam in pairs], [nu for nu, _ in pairs])
    nu_star, lam_star = pairs[best]

    w = adaptive_weights(pilot, nu_star, floor)
    grid = grids[nu_star]
    stop = int(np.flatnonzero(grid == lam_star)[0])
    betas, ok = _path(full, grid[: stop + 1], lambda lam: (lam * w, 0.0), tol, max_iter)
    penalty = PenaltySpec(lambda_n=lam_star, weights=w, nu=nu_star)
    fit = _result(full, betas[-1], penalty, bool(ok[-1]), 0, design, y)
    return CvResult(
        grid=pairs, cv_error=means, cv_se=ses, chosen=(nu_star, lam_star), folds=folds, fit=fit, pilot=pilot
    )


@dataclass
class FittedModel:
    """A fitted partition plus the fit itself, able to predict on new data."""

    method: str
    design: DesignPartition
    fit: PartialFitResult
    cv: CvResult | None = None

    def coefficients(self):
        """Original-scale ``(intercept, zeta, eta)``; ``eta`` has length ``p``."""
        d = self.design
        alpha, beta = self.fit.alpha, self.fit.beta
        b = beta / d.n_scale
        zeta = alpha[1 : 1 + d.c].copy()
        eta = np.zeros(d.p)
        eta[list(d.hub_columns)] = alpha[1 + d.c :]
        eta[list(d.nonhub_columns)] = b
        intercept = alpha[0] - alpha[1:] @ d.u_mean[1:] - b @ d.n_mean
        return float(intercept), zeta, eta

    def predict(self, Z, X) -> np.ndarray:
        U, N = self.design.transform(Z, X)
        return U @ self.fit.alpha + N @ self.fit.beta


def fit_baseline(
    method: str,
    Z,
    X,
    y,
    folds: int = 5,
    seed=0,
    n_lambda: int = 50,
    lambda_ratio: float = 1e-3,
    mixing: float = ENET_MIXING,
    nu_grid: Sequence[float] = DEFAULT_NU_GRID,
    tol: float = 1e-7,
    max_iter: int = 100_000,
) -> FittedModel:
    """Penalise every predictor, keeping only ``(1, Z)`` unpenalised.

    ``lasso`` uses unit weights, ``adaptive_lasso`` pilot-based weights,
    ``elastic_net`` the penalty ``lam * (mixing ||b||_1 + (1 - mixing)/2 ||b||^2)``
    and ``ridge`` the pure l2 penalty ``lam ||b||^2``.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    if folds not in (5, 10):
        raise ValueError("folds must be 5 or 10")
    data = Dataset(y=y, Z=Z, X=X)
    design = build_design(data, ())
    if method == "adaptive_lasso":
        cv = cross_validate(
            design, data.y, nu_grid, None, folds, seed, n_lambda, lambda_ratio, tol=tol, max_iter=max_iter
        )
        return FittedModel(method, design, cv.fit, cv)

    full = _Projected(design.U, design.N, data.y)
    ones = np.ones(design.q)
    if method == "lasso":
        pen: Callable = lambda lam: (lam * ones, 0.0)
        lmax = full.lambda_max(ones)
        grid = np.geomspace(lmax, lambda_ratio * lmax, n_lambda)
    elif method == "elastic_net":
        pen = lambda lam: (lam * mixing * ones, lam * (1.0 - mixing) / 2.0)
        lmax = full.lambda_max(ones) / mixing
        grid = np.geomspace(lmax, lambda_ratio * lmax, n_lambda)
    else:
        pen = lambda lam: (0.0 * ones, lam)
        s = float(np.mean(full.col_sq)) if design.q else 1.0
        grid = np.geomspace(1e4 * s, 1e-4 * s, n_lambda)

    mean, se, best = _cv_fixed(design, data.y, grid, pen, folds, seed, tol, max_iter)
    betas, ok = _path(full, grid[: best + 1], pen, tol, max_iter)
    l1, l2 = pen(grid[best])
    lam = float(grid[best])
    if method == "ridge":
        penalty = PenaltySpec(lambda_n=0.0, weights=ones, l2=l2)
    elif method == "elastic_net":
        penalty = PenaltySpec(lambda_n=lam * mixing, weights=ones, l2=l2)
    else:
        penalty = PenaltySpec(lambda_n=lam, weights=ones)
    fit = _result(full, betas[-1], penalty, bool(ok[-1]), 0, design, data.y)
    cv = CvResult(
        grid=[(None, float(g)) for g in grid], cv_error=mean, cv_se=se, chosen=(None, lam), folds=folds, fit=fit
    )
    return FittedModel(method, design, fit, cv)
