"""Independent reference implementations used to validate the package.

Everything here is deliberately written from scratch in plain-loop style,
without importing the package under test: probabilities via a direct softmax,
derivatives via finite differences of the scalar objective, expectations and
variances via explicit enumeration of the d+1 outcomes, maximum likelihood
via Fisher scoring, and distribution functions via numerical integration.
Slow is fine; these only run on tiny problems.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq


# ----------------------------------------------------------------- model ---

def oracle_probabilities(x, beta, d):
    """Softmax with an implicit zero score for the reference category."""
    kp1 = len(x)
    eta = []
    for j in range(d):
        eta.append(sum(beta[j * kp1 + m] * x[m] for m in range(kp1)))
    mx = max(max(eta), 0.0)
    ex = [math.exp(e - mx) for e in eta] + [math.exp(-mx)]
    tot = sum(ex)
    return [e / tot for e in ex]


def oracle_row_objective(x, yvec, beta, alpha, d):
    pi = oracle_probabilities(x, beta, d)
    if alpha == 0.0:
        return sum(yvec[j] * math.log(pi[j]) for j in range(d + 1) if yvec[j] != 0.0)
    gamma = sum(p ** (alpha + 1.0) for p in pi)
    upsilon = sum((pi[j] ** alpha) * yvec[j] for j in range(d + 1))
    return upsilon / gamma ** (alpha / (1.0 + alpha))


def oracle_objective(X, Y, beta, alpha):
    d = Y.shape[1] - 1
    vals = [oracle_row_objective(X[i], Y[i], beta, alpha, d) for i in range(len(X))]
    return sum(vals) / len(vals)


def fd_gradient_row(x, yvec, beta, alpha, d, h=1e-6):
    """Central finite difference of the row objective in beta."""
    p = len(beta)
    g = np.zeros(p)
    for m in range(p):
        bp = np.array(beta, dtype=float)
        bm = bp.copy()
        bp[m] += h
        bm[m] -= h
        g[m] = (
            oracle_row_objective(x, yvec, bp, alpha, d)
            - oracle_row_objective(x, yvec, bm, alpha, d)
        ) / (2.0 * h)
    return g


def fd_hessian_row(x, yvec, beta, alpha, d, h=1e-4):
    p = len(beta)
    H = np.zeros((p, p))
    for a_ in range(p):
        for b_ in range(a_, p):
            bpp = np.array(beta, dtype=float)
            bpm = bpp.copy()
            bmp = bpp.copy()
            bmm = bpp.copy()
            bpp[a_] += h
            bpp[b_] += h
            bpm[a_] += h
            bpm[b_] -= h
            bmp[a_] -= h
            bmp[b_] += h
            bmm[a_] -= h
            bmm[b_] -= h
            val = (
                oracle_row_objective(x, yvec, bpp, alpha, d)
                - oracle_row_objective(x, yvec, bpm, alpha, d)
                - oracle_row_objective(x, yvec, bmp, alpha, d)
                + oracle_row_objective(x, yvec, bmm, alpha, d)
            ) / (4.0 * h * h)
            H[a_, b_] = H[b_, a_] = val
    return H


def one_hot(j, m):
    v = [0.0] * m
    v[j] = 1.0
    return v


# ----------------------------------------- enumeration expectation oracles ---

def enum_curvature(X, beta, alpha):
    """-(1/n) sum_i E[hessian of the row objective], outcome-enumerated."""
    n = len(X)
    d = len(beta) // len(X[0])
    p = len(beta)
    total = np.zeros((p, p))
    for i in range(n):
        pi = oracle_probabilities(X[i], beta, d)
        acc = np.zeros((p, p))
        for j in range(d + 1):
            acc += pi[j] * fd_hessian_row(X[i], one_hot(j, d + 1), beta, alpha, d)
        total -= acc
    return total / n


def enum_score_variance(X, beta, alpha):
    """(1/n) sum_i Var[gradient of the row objective], outcome-enumerated."""
    n = len(X)
    d = len(beta) // len(X[0])
    p = len(beta)
    total = np.zeros((p, p))
    for i in range(n):
        pi = oracle_probabilities(X[i], beta, d)
        mean = np.zeros(p)
        second = np.zeros((p, p))
        for j in range(d + 1):
            g = fd_gradient_row(X[i], one_hot(j, d + 1), beta, alpha, d)
            mean += pi[j] * g
            second += pi[j] * np.outer(g, g)
        total += second - np.outer(mean, mean)
    return total / n


# ------------------------------------------------------------ IRLS oracle ---

def irls_fit(X, Y, max_iter=200, tol=1e-12):
    """Multinomial logit MLE by Fisher scoring.

    Returns (beta, covariance) where covariance is the inverse of the mean
    Fisher information (the asymptotic covariance of sqrt(n)(beta_hat-beta)).
    """
    X = np.asarray(X, float)
    Y = np.asarray(Y, float)
    n, kp1 = X.shape
    d = Y.shape[1] - 1
    p = d * kp1
    beta = np.zeros(p)
    for _ in range(max_iter):
        info = np.zeros((p, p))
        score = np.zeros(p)
        for i in range(n):
            pi = oracle_probabilities(X[i], beta, d)
            head = np.array(pi[:d])
            block = np.diag(head) - np.outer(head, head)
            xxt = np.outer(X[i], X[i])
            info += np.kron(block, xxt)
            score += np.kron(Y[i, :d] - head, X[i])
        step = np.linalg.solve(info, score)
        beta = beta + step
        if np.max(np.abs(step)) < tol:
            break
    cov = np.linalg.inv(info / n)
    return beta, cov


# -------------------------------------------------- weighted refit oracle ---

def _weighted_score_total(X, W, beta, alpha, d, h=1e-6):
    p = len(beta)
    total = np.zeros(p)
    for i in range(len(X)):
        for j in range(d + 1):
            w = W[i][j]
            if w == 0.0:
                continue
            total += w * fd_gradient_row(X[i], one_hot(j, d + 1), beta, alpha, d, h=h)
    return total


def weighted_refit(X, W, beta_start, alpha, max_iter=40, tol=1e-12):
    """Solve sum_ij W_ij * grad s(x_i, e_j; beta) = 0 by Newton iteration."""
    X = np.asarray(X, float)
    d = W.shape[1] - 1
    p = len(beta_start)
    beta = np.array(beta_start, float)
    for _ in range(max_iter):
        g = _weighted_score_total(X, W, beta, alpha, d)
        jac = np.zeros((p, p))
        h = 1e-6
        for m in range(p):
            bp = beta.copy()
            bm = beta.copy()
            bp[m] += h
            bm[m] -= h
            jac[:, m] = (
                _weighted_score_total(X, W, bp, alpha, d)
                - _weighted_score_total(X, W, bm, alpha, d)
            ) / (2.0 * h)
        step = np.linalg.solve(jac, -g)
        beta = beta + step
        if np.max(np.abs(step)) < tol:
            break
    return beta


def refit_influence(X, beta0, i0, t, alpha, eps=1e-4):
    """One-sided contamination derivative, scaled by n.

    The population refit weights every outcome of every row by its model
    probability at beta0 (so beta0 solves the eps=0 problem exactly), then
    tilts row i0 toward the contaminating point t by eps.
    """
    X = np.asarray(X, float)
    n = len(X)
    d = len(beta0) // X.shape[1]
    W = np.array([oracle_probabilities(X[i], beta0, d) for i in range(n)])
    W[i0] = (1.0 - eps) * W[i0] + eps * np.asarray(t, float)
    beta_eps = weighted_refit(X, W, beta0, alpha)
    return n * (beta_eps - np.asarray(beta0, float)) / eps


def refit_influence_all(X, beta0, ts, alpha, eps=1e-4):
    """Same derivative when every row i is tilted toward its own t_i."""
    X = np.asarray(X, float)
    n = len(X)
    d = len(beta0) // X.shape[1]
    W = np.array([oracle_probabilities(X[i], beta0, d) for i in range(n)])
    W = (1.0 - eps) * W + eps * np.asarray(ts, float)
    beta_eps = weighted_refit(X, W, beta0, alpha)
    return n * (beta_eps - np.asarray(beta0, float)) / eps


# ------------------------------------------------- distribution functions ---

def chi2_sf_oracle(w, df):
    """Upper tail by adaptive quadrature of the chi-square density."""
    if w <= 0:
        return 1.0

    def density(u):
        return (
            u ** (df / 2.0 - 1.0)
            * math.exp(-u / 2.0)
            / (2.0 ** (df / 2.0) * math.gamma(df / 2.0))
        )

    val, _ = quad(density, w, np.inf, limit=200)
    return val


def chi2_quantile_oracle(df, tau):
    """Solve sf(q) = tau by bracketing."""
    return brentq(lambda w: chi2_sf_oracle(w, df) - tau, 1e-10, 500.0, xtol=1e-12)


def normal_cdf_oracle(z):
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))
