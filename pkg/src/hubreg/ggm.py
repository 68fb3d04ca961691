"""Sparse Gaussian graphical models: graphical Lasso, eBIC tuning and
partial correlations.

The penalty only touches off-diagonal entries and counts each pair twice
(``sum_{j != k} |theta_jk|``), so the stationarity condition reads
``inv(theta)_jk - S_jk = lam * sign(theta_jk)`` and the empty graph is
optimal as soon as ``lam >= max_{j != k} |S_jk|``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from ._kernels import glasso_sweep

logger = logging.getLogger(__name__)

ZERO_THRESHOLD = 1e-8


class SingularCovarianceError(ValueError):
    """Raised when an unpenalised fit is requested on a singular covariance."""


@dataclass(frozen=True)
class CovarianceEstimate:
    sample_mean: np.ndarray
    matrix: np.ndarray
    n_samples: int

    @property
    def p(self) -> int:
        return self.matrix.shape[0]


@dataclass
class PrecisionEstimate:
    """Result of one graphical-Lasso fit.

    ``objective_path`` holds the penalised log-likelihood after every sweep
    (index 0 is the starting point). ``covariance`` is the estimate the fit
    was computed from; eBIC needs it.
    """

    theta: np.ndarray
    lam: float
    objective_value: float
    edge_count: int
    converged: bool
    iterations: int
    covariance: CovarianceEstimate
    objective_path: list[float] = field(default_factory=list)
    zero_threshold: float = ZERO_THRESHOLD

    @property
    def edges(self) -> list[tuple[int, int]]:
        j, k = np.nonzero(np.triu(np.abs(self.theta) > self.zero_threshold, 1))
        return list(zip(j.tolist(), k.tolist()))


@dataclass(frozen=True)
class PartialCorrelationMatrix:
    rho: np.ndarray


@dataclass(frozen=True)
class EbicConfig:
    """Tuning of the eBIC search.

    ``patience`` (optional) ends the path early once that many consecutive
    grid points fail to improve on the best score so far; ``None`` fits
    every grid point.
    """

    gamma: float = 0.5
    lambda_grid: tuple[float, ...] | None = None
    patience: int | None = None

    def __post_init__(self):
        if self.patience is not None and self.patience < 1:
            raise ValueError("patience must be a positive integer")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.lambda_grid is not None:
            grid = np.asarray(self.lambda_grid, dtype=float)
            if grid.size == 0:
                raise ValueError("lambda_grid must be non-empty")
            if np.any(grid < 0):
                raise ValueError("lambda_grid entries must be non-negative")
            if np.any(np.diff(grid) >= 0):
                raise ValueError("lambda_grid must be strictly decreasing")


@dataclass
class EbicSelection:
    fit: PrecisionEstimate
    lam: float
    scores: np.ndarray
    lambda_grid: np.ndarray
    edge_counts: np.ndarray
    all_failed: bool = False


def standardize_columns(X):
    """Centre each column and scale it to unit variance (divisor ``n``).

    Constant columns are centred but left unscaled.
    """
    X = np.asarray(X, dtype=float)
    mean = X.mean(axis=0)
    sd = X.std(axis=0)
    scale = np.where(sd > 0, sd, 1.0)
    return (X - mean) / scale, mean, scale


def empirical_covariance(X) -> CovarianceEstimate:
    """Maximum-likelihood covariance (divisor ``n``)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be a 2-D array")
    n = X.shape[0]
    if n < 2:
        raise ValueError(f"need at least 2 observations, got {n}")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite entries")
    mean = X.mean(axis=0)
    Xc = X - mean
    S = Xc.T @ Xc / n
    S = 0.5 * (S + S.T)
    return CovarianceEstimate(sample_mean=mean, matrix=S, n_samples=n)


def lambda_max(S) -> float:
    """Smallest penalty for which the graphical Lasso returns the empty graph."""
    S = _as_matrix(S)
    if S.shape[0] < 2:
        return 0.0
    off = np.abs(S - np.diag(np.diag(S)))
    return float(off.max())


def default_lambda_grid(S, n_lambda: int = 30, ratio: float = 0.01) -> np.ndarray:
    lmax = lambda_max(S)
    if lmax <= 0:
        return np.array([0.0])
    return np.geomspace(lmax, ratio * lmax, n_lambda)


def _as_matrix(S) -> np.ndarray:
    if isinstance(S, CovarianceEstimate):
        return S.matrix
    return np.asarray(S, dtype=float)


def penalized_loglik(theta, S, lam) -> float:
    """``log det theta - tr(S theta) - lam * sum_{j != k} |theta_jk|``."""
    try:
        c = linalg.cholesky(theta, lower=True)
    except linalg.LinAlgError:
        return -np.inf
    logdet = 2.0 * np.sum(np.log(np.diag(c)))
    off = np.abs(theta).sum() - np.abs(np.diag(theta)).sum()
    return float(logdet - np.sum(S * theta) - lam * off)


def _inverse_pd(A):
    c, low = linalg.cho_factor(A, lower=True)
    inv = linalg.cho_solve((c, low), np.eye(A.shape[0]))
    return 0.5 * (inv + inv.T)


def graphical_lasso(
    S,
    lam: float,
    tol: float = 1e-6,
    max_iter: int = 200,
    theta_init=None,
    zero_threshold: float = ZERO_THRESHOLD,
) -> PrecisionEstimate:
    """Maximise ``log det(Theta) - tr(S Theta) - lam * ||Theta||_1,off``.

    Parameters
    ----------
    S : CovarianceEstimate or array of shape (p, p)
    lam : float
        Non-negative penalty on off-diagonal entries.
    tol : float
        Convergence threshold on the mean absolute change of ``Theta``
        between sweeps.
    max_iter : int
        Maximum number of sweeps over the columns.
    theta_init : array, optional
        Positive-definite warm start. Defaults to ``diag(1 / S_jj)``.

    Returns
    -------
    PrecisionEstimate
        On non-convergence the last iterate is returned with
        ``converged=False``.
    """
    cov = S if isinstance(S, CovarianceEstimate) else None
    S = _as_matrix(S)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError("S must be square")
    if not np.allclose(S, S.T, atol=1e-10):
        raise ValueError("S must be symmetric")
    if lam < 0:
        raise ValueError(f"lam must be non-negative, got {lam}")
    if cov is None:
        cov = CovarianceEstimate(np.zeros(S.shape[0]), S, n_samples=0)
    diag = np.diag(S)
    if np.any(diag <= 0):
        raise ValueError("S has non-positive diagonal entries")
    if lam == 0:
        try:
            linalg.cholesky(S, lower=True)
        except linalg.LinAlgError as exc:
            raise SingularCovarianceError(
                "lam = 0 requires an invertible covariance (p < n, full rank)"
            ) from exc
        if np.linalg.cond(S) > 1e12:
            raise SingularCovarianceError("covariance is numerically singular")

    S = np.ascontiguousarray(S, dtype=float)
    if theta_init is None:
        theta = np.diag(1.0 / diag)
    else:
        theta = np.array(theta_init, dtype=float, copy=True)
        theta = 0.5 * (theta + theta.T)
    try:
        W = _inverse_pd(theta)
    except linalg.LinAlgError:
        theta = np.diag(1.0 / diag)
        W = _inverse_pd(theta)

    path = [penalized_loglik(theta, S, lam)]
    converged = False
    it = 0
    inner_tol = min(tol, 1e-6)
    for it in range(1, max_iter + 1):
        old = theta.copy()
        glasso_sweep(S, theta, W, float(lam), inner_tol, 1000)
        theta = 0.5 * (theta + theta.T)
        try:
            W = _inverse_pd(theta)
        except linalg.LinAlgError:
            logger.warning("precision iterate lost positive definiteness at sweep %d", it)
            break
        path.append(penalized_loglik(theta, S, lam))
        if np.mean(np.abs(theta - old)) < tol:
            converged = True
            break

    edges = int(np.sum(np.abs(np.triu(theta, 1)) > zero_threshold))
    return PrecisionEstimate(
        theta=theta,
        lam=float(lam),
        objective_value=path[-1],
        edge_count=edges,
        converged=converged,
        iterations=it,
        covariance=cov,
        objective_path=path,
        zero_threshold=zero_threshold,
    )


def gaussian_loglik(fit: PrecisionEstimate, n: int) -> float:
    """``(n/2) [log det Theta - tr(S Theta)]`` at the fitted precision."""
    theta = fit.theta
    sign, logdet = np.linalg.slogdet(theta)
    if sign <= 0 or np.min(np.linalg.eigvalsh(theta)) <= 0:
        raise ValueError("precision matrix is not positive definite")
    return 0.5 * n * (logdet - float(np.sum(fit.covariance.matrix * theta)))


def ebic_score(fit: PrecisionEstimate, n: int, p: int, gamma: float) -> float:
    """Extended BIC: ``-2 loglik + E log n + 4 gamma E log p``.

    The log-likelihood is the unpenalised Gaussian one evaluated at the
    fitted precision; ``E`` is the number of edges.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if p < 1:
        raise ValueError("p must be at least 1")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    E = fit.edge_count
    return -2.0 * gaussian_loglik(fit, n) + E * np.log(n) + 4.0 * gamma * E * np.log(p)


def select_precision_by_ebic(
    X,
    config: EbicConfig | None = None,
    *,
    standardize: bool = True,
    tol: float = 1e-6,
    max_iter: int = 200,
) -> EbicSelection:
    """Fit the graphical Lasso along a decreasing grid and keep the eBIC minimiser.

    Fits are warm-started from the previous grid point. Ties go to the
    larger penalty. If no fit converges the best non-converged one is
    returned and ``all_failed`` is set.
    """
    config = config or EbicConfig()
    X = np.asarray(X, dtype=float)
    if standardize:
        X = standardize_columns(X)[0]
    cov = empirical_covariance(X)
    n, p = X.shape
    grid = (
        np.asarray(config.lambda_grid, dtype=float)
        if config.lambda_grid is not None
        else default_lambda_grid(cov.matrix)
    )

    fits, scores = [], []
    theta = None
    best_score, stale = np.inf, 0
    for lam in grid:
        fit = graphical_lasso(cov, lam, tol=tol, max_iter=max_iter, theta_init=theta)
        theta = fit.theta
        fits.append(fit)
        score = ebic_score(fit, n, p, config.gamma)
        scores.append(score)
        if score < best_score:
            best_score, stale = score, 0
        else:
            stale += 1
        if config.patience is not None and stale >= config.patience:
            break
    grid = grid[: len(fits)]
    scores = np.asarray(scores)
    ok = np.array([f.converged for f in fits])
    all_failed = not ok.any()
    candidates = np.arange(len(fits)) if all_failed else np.flatnonzero(ok)
    best = candidates[np.argmin(scores[candidates])]  # first minimum = largest lambda
    if all_failed:
        warnings.warn("no graphical-Lasso fit converged; returning best non-converged fit")
    return EbicSelection(
        fit=fits[best],
        lam=float(grid[best]),
        scores=scores,
        lambda_grid=grid,
        edge_counts=np.array([f.edge_count for f in fits]),
        all_failed=all_failed,
    )


def partial_correlations(fit: PrecisionEstimate | np.ndarray) -> PartialCorrelationMatrix:
    """Standardise the precision matrix with a sign flip: ``-theta_jk / sqrt(theta_jj theta_kk)``."""
    theta = fit.theta if isinstance(fit, PrecisionEstimate) else np.asarray(fit, dtype=float)
    d = np.diag(theta)
    if np.any(d <= 0):
        raise ValueError("precision matrix has non-positive diagonal")
    s = np.sqrt(d)
    rho = -theta / np.outer(s, s)
    rho = np.triu(rho, 1)
    rho = rho + rho.T
    np.fill_diagonal(rho, 1.0)
    return PartialCorrelationMatrix(rho=rho)
