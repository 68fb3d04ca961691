"""Compiled inner loops for the two coordinate-descent solvers.

Everything here works on plain float64 arrays and mutates its arguments in
place; validation and bookkeeping live in the calling modules.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _soft(z, t):
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


@njit(cache=True)
def glasso_sweep(S, theta, W, lam, inner_tol, inner_max):
    """One pass of block updates over all columns of the precision matrix.

    Column ``j`` is updated by minimising the primal objective over
    ``(theta[:, j], theta[j, j])`` with the other entries fixed. With
    ``M = inv(theta_11)`` the off-diagonal block solves the Lasso

        min_x  s_jj x'Mx + 2 s_12'x + 2 lam ||x||_1

    and the diagonal is then set so that the Schur complement equals
    ``1 / s_jj``. ``W`` must hold ``inv(theta)`` on entry and is kept equal
    to it through rank-two updates.

    Returns the total number of inner coordinate passes.
    """
    p = S.shape[0]
    x = np.empty(p)
    g = np.empty(p)
    wcol = np.empty(p)
    passes = 0
    for j in range(p):
        s22 = S[j, j]
        w22 = W[j, j]
        for k in range(p):
            wcol[k] = W[k, j]
            x[k] = theta[k, j]
        x[j] = 0.0
        # g = M x with M_kl = W_kl - W_kj W_lj / w22, restricted to k, l != j
        for k in range(p):
            g[k] = 0.0
        for l in range(p):
            xl = x[l]
            if l == j or xl == 0.0:
                continue
            c = wcol[l] / w22
            for k in range(p):
                g[k] += (W[l, k] - wcol[k] * c) * xl
        g[j] = 0.0

        for _ in range(inner_max):
            passes += 1
            max_change = 0.0
            for k in range(p):
                if k == j:
                    continue
                mkk = W[k, k] - wcol[k] * wcol[k] / w22
                a = s22 * mkk
                b = s22 * (g[k] - mkk * x[k]) + S[k, j]
                new = -_soft(b, lam) / a
                d = new - x[k]
                if d != 0.0:
                    c = wcol[k] / w22
                    for l in range(p):
                        g[l] += (W[k, l] - wcol[l] * c) * d
                    g[j] = 0.0
                    x[k] = new
                    ad = abs(d)
                    if ad > max_change:
                        max_change = ad
            if max_change < inner_tol:
                break

        quad = 0.0
        for k in range(p):
            quad += x[k] * g[k]
        for k in range(p):
            if k != j:
                theta[k, j] = x[k]
                theta[j, k] = x[k]
        theta[j, j] = 1.0 / s22 + quad

        # W_11 <- M + s22 g g',  w_12 <- -s22 g,  w_22 <- s22
        for l in range(p):
            if l == j:
                continue
            cl = wcol[l] / w22
            gl = s22 * g[l]
            for k in range(p):
                if k == j:
                    continue
                W[l, k] += -wcol[k] * cl + g[k] * gl
        for k in range(p):
            if k != j:
                W[k, j] = -s22 * g[k]
                W[j, k] = -s22 * g[k]
        W[j, j] = s22
    return passes


@njit(cache=True)
def _cd_pass(X, r, beta, col_sq, thresh, l2, active_only):
    n, q = X.shape
    max_change = 0.0
    for j in range(q):
        if active_only and beta[j] == 0.0:
            continue
        denom = col_sq[j] + l2
        if denom <= 0.0:
            continue
        z = col_sq[j] * beta[j]
        for i in range(n):
            z += X[i, j] * r[i]
        new = _soft(z, thresh[j]) / denom
        d = new - beta[j]
        if d != 0.0:
            for i in range(n):
                r[i] -= X[i, j] * d
            beta[j] = new
            ad = abs(d)
            if ad > max_change:
                max_change = ad
    return max_change


@njit(cache=True)
def kkt_violation(X, r, beta, l1, l2, zero_threshold):
    """Largest violation of the subgradient conditions for

        ||r||^2 + sum_j l1_j |b_j| + l2 ||b||^2,   r = y - X b.
    """
    n, q = X.shape
    worst = 0.0
    for j in range(q):
        grad = 0.0
        for i in range(n):
            grad += X[i, j] * r[i]
        grad = 2.0 * grad - 2.0 * l2 * beta[j]
        if abs(beta[j]) > zero_threshold:
            s = 1.0 if beta[j] > 0.0 else -1.0
            v = abs(grad - l1[j] * s)
        else:
            v = abs(grad) - l1[j]
        if v > worst:
            worst = v
    return worst


@njit(cache=True)
def enet_cd(X, r, beta, col_sq, l1, l2, tol, max_iter, kkt_tol, zero_threshold):
    """Cyclic coordinate descent with active-set cycling.

    Minimises ``||r||^2 + sum_j l1_j |b_j| + l2 ||b||^2`` where
    ``r = y - X b`` is passed in already consistent with ``beta`` (warm
    start). A run is declared converged only when a full pass moves no
    coefficient by ``tol`` or more *and* the subgradient conditions hold to
    ``kkt_tol``.

    Returns ``(sweeps, converged)``.
    """
    q = X.shape[1]
    thresh = np.empty(q)
    for j in range(q):
        thresh[j] = 0.5 * l1[j]
    sweeps = 0
    while sweeps < max_iter:
        change = _cd_pass(X, r, beta, col_sq, thresh, l2, False)
        sweeps += 1
        if change < tol:
            if kkt_violation(X, r, beta, l1, l2, zero_threshold) <= kkt_tol:
                return sweeps, True
            continue
        while sweeps < max_iter:
            change = _cd_pass(X, r, beta, col_sq, thresh, l2, True)
            sweeps += 1
            if change < tol:
                break
    return sweeps, False
