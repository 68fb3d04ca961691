import numpy as np
import pytest
from hypothesis import given, strategies as st

from hubreg.ggm import (
    EbicConfig,
    SingularCovarianceError,
    ebic_score,
    empirical_covariance,
    gaussian_loglik,
    graphical_lasso,
    lambda_max,
    partial_correlations,
    penalized_loglik,
    select_precision_by_ebic,
    standardize_columns,
)


def random_cov(rng, p, n=200):
    A = np.eye(p) + 0.3 * rng.standard_normal((p, p))
    return empirical_covariance(rng.standard_normal((n, p)) @ A)


# empirical covariance ---------------------------------------------------------

def test_identical_rows_give_zero_covariance():
    X = np.array([[1.0, 2.0, -3.0], [1.0, 2.0, -3.0]])
    np.testing.assert_array_equal(empirical_covariance(X).matrix, np.zeros((3, 3)))


def test_two_point_column():
    est = empirical_covariance(np.array([[-1.0], [1.0]]))
    assert est.sample_mean[0] == 0.0
    np.testing.assert_array_equal(est.matrix, [[1.0]])


def test_covariance_matches_double_loop(rng):
    X = rng.standard_normal((50, 4))
    n, p = X.shape
    mean = [sum(X[i, j] for i in range(n)) / n for j in range(p)]
    brute = np.array(
        [[sum((X[i, j] - mean[j]) * (X[i, k] - mean[k]) for i in range(n)) / n for k in range(p)] for j in range(p)]
    )
    np.testing.assert_allclose(empirical_covariance(X).matrix, brute, atol=1e-12, rtol=0)


def test_covariance_rejects_bad_input():
    with pytest.raises(ValueError):
        empirical_covariance(np.ones((1, 3)))
    with pytest.raises(ValueError):
        empirical_covariance(np.array([[1.0, np.nan], [2.0, 3.0]]))


@given(st.integers(2, 30), st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_covariance_symmetric_nonnegative_diagonal(n, p, seed):
    X = np.random.default_rng(seed).standard_normal((n, p))
    S = empirical_covariance(X).matrix
    assert np.max(np.abs(S - S.T)) <= 1e-12
    assert np.all(np.diag(S) >= 0)


def test_standardize_columns_unit_variance(rng):
    X = rng.standard_normal((40, 3)) * [1, 5, 0.1] + 7
    Xs, mean, scale = standardize_columns(X)
    np.testing.assert_allclose(Xs.mean(axis=0), 0, atol=1e-12)
    np.testing.assert_allclose(Xs.std(axis=0), 1, atol=1e-12)


# graphical lasso ---------------------------------------------------------------

def p2_grid_oracle(S, lam, grid_size=200001):
    """Maximise the p=2 objective over theta12, solving the diagonal per candidate.

    For fixed theta12 = t the objective is log(a b - t^2) - s11 a - s22 b
    - 2 s12 t - 2 lam |t|; the optimal diagonal solves 1/s11 * ... in closed
    form: a = (1 + sqrt(1 + 4 s11 s22 t^2)) / (2 s11), b = a s11 / s22.
    """
    s11, s22, s12 = S[0, 0], S[1, 1], S[0, 1]
    best = -np.inf
    bound = 3.0 / np.sqrt(s11 * s22) / max(1e-3, 1 - (s12**2) / (s11 * s22))
    for t in np.linspace(-bound, bound, grid_size):
        a = (1 + np.sqrt(1 + 4 * s11 * s22 * t * t)) / (2 * s11)
        b = a * s11 / s22
        det = a * b - t * t
        if det <= 0:
            continue
        val = np.log(det) - s11 * a - s22 * b - 2 * s12 * t - 2 * lam * abs(t)
        best = max(best, val)
    return best


def test_p2_matches_grid_oracle():
    S = np.array([[1.0, 0.5], [0.5, 1.0]])
    fit = graphical_lasso(S, 0.1, tol=1e-10)
    assert abs(fit.objective_value - p2_grid_oracle(S, 0.1)) < 1e-6
    # stationarity: W12 - S12 = lam sign(theta12)
    W = np.linalg.inv(fit.theta)
    assert W[0, 1] - S[0, 1] == pytest.approx(0.1 * np.sign(fit.theta[0, 1]), abs=1e-8)


@pytest.mark.parametrize("lam_factor", [1.0, 1.5, 10.0])
def test_large_penalty_gives_diagonal(rng, lam_factor):
    S = random_cov(rng, 5).matrix
    fit = graphical_lasso(S, lam_factor * lambda_max(S))
    assert fit.edge_count == 0
    np.testing.assert_allclose(fit.theta, np.diag(1 / np.diag(S)), atol=1e-12)


def test_zero_penalty_inverts(rng):
    est = random_cov(rng, 6)
    fit = graphical_lasso(est, 0.0, tol=1e-10, max_iter=1000)
    assert fit.converged
    np.testing.assert_allclose(fit.theta, np.linalg.inv(est.matrix), atol=1e-6)


def test_zero_penalty_singular_raises():
    X = np.random.default_rng(0).standard_normal((3, 5))
    with pytest.raises(SingularCovarianceError):
        graphical_lasso(empirical_covariance(X), 0.0)


def test_rejects_negative_penalty_and_asymmetric_input():
    with pytest.raises(ValueError):
        graphical_lasso(np.eye(2), -0.1)
    with pytest.raises(ValueError):
        graphical_lasso(np.array([[1.0, 0.2], [0.1, 1.0]]), 0.1)


def stationarity_gap(fit, S, lam):
    W = np.linalg.inv(fit.theta)
    G = W - S
    nz = np.abs(fit.theta) > fit.zero_threshold
    off = ~np.eye(S.shape[0], dtype=bool)
    active = np.abs(G - lam * np.sign(fit.theta))[nz & off]
    inactive = (np.abs(G) - lam)[~nz & off]
    return active.max(initial=0.0), inactive.max(initial=-np.inf)


@given(st.integers(2, 7), st.floats(0.05, 0.9), st.integers(0, 2**31 - 1))
def test_stationarity_and_monotone_objective(p, frac, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((60, p)) @ rng.standard_normal((p, p))
    S = empirical_covariance(standardize_columns(X)[0]).matrix
    lam = frac * lambda_max(S)
    tol = 1e-8
    fit = graphical_lasso(S, lam, tol=tol, max_iter=2000)
    assert fit.converged
    act, inact = stationarity_gap(fit, S, lam)
    assert act <= 1e-5 and inact <= 1e-5
    path = np.asarray(fit.objective_path)
    assert np.all(np.diff(path) >= -1e-10)
    assert fit.objective_value == pytest.approx(penalized_loglik(fit.theta, S, lam))
    np.testing.assert_array_equal(fit.theta, fit.theta.T)


def test_edge_count_matches_upper_triangle(rng):
    S = random_cov(rng, 6).matrix
    S = S / np.sqrt(np.outer(np.diag(S), np.diag(S)))
    fit = graphical_lasso(S, 0.3 * lambda_max(S))
    assert fit.edge_count == int(np.sum(np.abs(np.triu(fit.theta, 1)) > 1e-8))
    assert len(fit.edges) == fit.edge_count


def test_matches_independent_reference_solver(rng):
    # sklearn uses the same off-diagonal penalty convention
    skl = pytest.importorskip("sklearn.covariance")
    S = random_cov(rng, 6).matrix
    S = S / np.sqrt(np.outer(np.diag(S), np.diag(S)))
    lam = 0.2 * lambda_max(S)
    _, ref = skl.graphical_lasso(S, lam, tol=1e-10, max_iter=1000)
    ours = graphical_lasso(S, lam, tol=1e-10, max_iter=1000).theta
    np.testing.assert_allclose(ours, ref, atol=1e-6)


# eBIC -------------------------------------------------------------------------

def test_ebic_gamma_zero_is_bic(rng):
    est = random_cov(rng, 4)
    fit = graphical_lasso(est, 0.2 * lambda_max(est))
    n = 200
    bic = -2 * gaussian_loglik(fit, n) + fit.edge_count * np.log(n)
    assert ebic_score(fit, n, 4, 0.0) == bic


def test_ebic_without_edges_ignores_gamma(rng):
    est = random_cov(rng, 4)
    fit = graphical_lasso(est, 2 * lambda_max(est))
    assert fit.edge_count == 0
    scores = {ebic_score(fit, 200, 4, g) for g in (0.0, 0.5, 1.0)}
    assert scores == {-2 * gaussian_loglik(fit, 200)}


def test_ebic_hand_arithmetic():
    theta = np.array([[2.0, -0.5, 0.0], [-0.5, 2.0, 0.3], [0.0, 0.3, 1.5]])
    S = np.array([[0.6, 0.2, 0.1], [0.2, 0.7, -0.1], [0.1, -0.1, 0.8]])
    from hubreg.ggm import CovarianceEstimate, PrecisionEstimate

    fit = PrecisionEstimate(theta, 0.1, 0.0, 2, True, 1, CovarianceEstimate(np.zeros(3), S, 100))
    ll = 50 * (np.log(np.linalg.det(theta)) - np.trace(S @ theta))
    expected = -2 * ll + 2 * np.log(100) + 4 * 0.5 * 2 * np.log(3)
    assert ebic_score(fit, 100, 3, 0.5) == pytest.approx(expected, rel=1e-12)


def test_ebic_config_validation():
    with pytest.raises(ValueError):
        EbicConfig(lambda_grid=(0.1, 0.2))
    with pytest.raises(ValueError):
        EbicConfig(lambda_grid=())
    with pytest.raises(ValueError):
        EbicConfig(gamma=1.5)
    with pytest.raises(ValueError):
        EbicConfig(patience=0)


def test_single_point_grid_returns_that_fit(rng):
    X = rng.standard_normal((80, 5))
    sel = select_precision_by_ebic(X, EbicConfig(lambda_grid=(0.2,)))
    assert sel.lam == 0.2 and sel.fit.lam == 0.2 and len(sel.scores) == 1


def test_selection_picks_minimum_and_breaks_ties_to_larger_lambda(rng):
    X = rng.standard_normal((100, 6))
    sel = select_precision_by_ebic(X)
    i = int(np.argmin(sel.scores))
    assert sel.lam == sel.lambda_grid[i]
    assert np.all(sel.scores[:i] > sel.scores[i])


def test_patience_stops_early_without_changing_choice(rng):
    X = rng.standard_normal((100, 10)) @ rng.standard_normal((10, 10))
    full = select_precision_by_ebic(X)
    early = select_precision_by_ebic(X, EbicConfig(patience=5))
    assert len(early.scores) <= len(full.scores)
    assert early.lam == full.lam or np.min(early.scores) >= np.min(full.scores)


@pytest.mark.slow
def test_independent_data_mostly_selects_empty_graph():
    empty = 0
    for seed in range(100):
        X = np.random.default_rng([seed, 5]).standard_normal((100, 5))
        empty += select_precision_by_ebic(X, EbicConfig(gamma=0.5)).fit.edge_count == 0
    assert empty >= 95


@pytest.mark.slow
def test_chain_graph_recovered_in_most_runs():
    p = 6
    theta = np.eye(p) + np.diag(np.full(p - 1, -0.4), 1) + np.diag(np.full(p - 1, -0.4), -1)
    chain = {(j, j + 1) for j in range(p - 1)}
    L = np.linalg.cholesky(np.linalg.inv(theta))
    hits = 0
    for seed in range(50):
        X = np.random.default_rng([seed, 6]).standard_normal((500, p)) @ L.T
        hits += set(select_precision_by_ebic(X).fit.edges) == chain
    assert hits > 25


# partial correlations ----------------------------------------------------------

def test_identity_precision_gives_identity():
    np.testing.assert_array_equal(partial_correlations(np.eye(4)).rho, np.eye(4))


def test_two_by_two_sign_flip():
    rho = partial_correlations(np.array([[1.0, -0.5], [-0.5, 1.0]])).rho
    assert rho[0, 1] == 0.5 and rho[1, 0] == 0.5


def schur_partial_corr(theta, j, k):
    sigma = np.linalg.inv(theta)
    rest = [i for i in range(theta.shape[0]) if i not in (j, k)]
    a = [j, k]
    cond = sigma[np.ix_(a, a)] - sigma[np.ix_(a, rest)] @ np.linalg.solve(sigma[np.ix_(rest, rest)], sigma[np.ix_(rest, a)])
    return cond[0, 1] / np.sqrt(cond[0, 0] * cond[1, 1])


def test_partial_correlation_schur_oracle(rng):
    A = rng.standard_normal((4, 4))
    theta = A @ A.T + 0.5 * np.eye(4)
    rho = partial_correlations(theta).rho
    for j in range(4):
        for k in range(j + 1, 4):
            assert rho[j, k] == pytest.approx(schur_partial_corr(theta, j, k), abs=1e-10)


@given(st.integers(2, 8), st.integers(0, 2**31 - 1))
def test_partial_correlations_bounded_symmetric(p, seed):
    A = np.random.default_rng(seed).standard_normal((p, p))
    rho = partial_correlations(A @ A.T + 0.1 * np.eye(p)).rho
    assert np.array_equal(rho, rho.T)
    assert np.all(np.abs(rho) <= 1 + 1e-12)
    assert np.all(np.diag(rho) == 1)


def test_sparsity_pattern_survives(rng):
    est = random_cov(rng, 7)
    S = est.matrix / np.sqrt(np.outer(np.diag(est.matrix), np.diag(est.matrix)))
    fit = graphical_lasso(S, 0.4 * lambda_max(S))
    rho = partial_correlations(fit).rho
    off = ~np.eye(7, dtype=bool)
    assert np.array_equal((fit.theta == 0) & off, (rho == 0) & off)


def test_nonpositive_diagonal_rejected():
    with pytest.raises(ValueError):
        partial_correlations(np.array([[0.0, 0.1], [0.1, 1.0]]))
