"""Probability model and objective layer for the polytomous logistic model.

The response takes one of d+1 unordered categories; the last category is the
reference.  With x = (1, x_1, ..., x_k) and per-category coefficient blocks
b_1, ..., b_d stacked into one flat vector beta (category-major), category
probabilities are

    pi_j = exp(x.b_j) / (1 + sum_s exp(x.b_s)),   j = 1..d
    pi_{d+1} = 1 - sum_j pi_j.

Estimation maximizes the mean of a per-row objective ``s``.  For tuning
parameter ``alpha > 0`` the row objective is

    s = Upsilon / Gamma^(alpha/(1+alpha)),
    Gamma = sum_j pi_j^(alpha+1),   Upsilon = sum_j pi_j^alpha y_j,

which is a monotone transform of the Renyi pseudodistance between the fitted
probability vector and the observed indicator.  At ``alpha = 0`` the row
objective is the log-likelihood sum_j y_j log pi_j, so one maximizer interface
covers both regimes.  ``score_vector``/``score_matrix`` return the exact
gradient of the active row objective; in particular for alpha > 0 it carries
a leading factor alpha relative to the bare estimating function (the factor
is a positive constant, so the estimating equations are unchanged, while
gradient checks against the objective hold exactly).

All functions are pure and thread-safe.
"""
from __future__ import annotations

import numpy as np

from ._validation import check_alpha, check_beta, check_design, check_response

__all__ = [
    "PROB_FLOOR",
    "linear_predictors",
    "category_probabilities",
    "delta_matrix",
    "renyi_divergence",
    "power_sums",
    "row_objective",
    "objective",
    "score_vector",
    "score_matrix",
    "mean_score",
]

# Probabilities are clamped here before logs and fractional powers; the score
# and divergence contain pi^(alpha-1), singular at 0.
PROB_FLOOR = 1e-12


def _pow(p: np.ndarray, a: float) -> np.ndarray:
    """p**a as exp(a*log p) with the probability floor applied."""
    return np.exp(a * np.log(np.maximum(p, PROB_FLOOR)))


def linear_predictors(design, beta) -> np.ndarray:
    """Linear predictors eta, shape (n, d): eta[i, j] = x_i . b_{j+1}."""
    X = check_design(design)
    b = check_beta(beta, X.shape[1])
    B = b.reshape(-1, X.shape[1])
    return X @ B.T


def _probabilities_raw(X: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Probability matrix from a validated design and a (d, k+1) block matrix."""
    eta = X @ B.T
    full = np.concatenate([eta, np.zeros((X.shape[0], 1))], axis=1)
    full -= full.max(axis=1, keepdims=True)
    e = np.exp(full)
    return e / e.sum(axis=1, keepdims=True)


def category_probabilities(design, beta) -> np.ndarray:
    """Category probabilities, shape (n, d+1), last column the reference.

    Computed with a max-shift so large predictors saturate cleanly instead of
    overflowing; rows always sum to 1 and never contain NaN.
    """
    X = check_design(design)
    b = check_beta(beta, X.shape[1])
    return _probabilities_raw(X, b.reshape(-1, X.shape[1]))


def delta_matrix(p, truncated: bool = False) -> np.ndarray:
    """diag(p) - p p^T for one probability vector.

    With ``truncated=True`` the last row is dropped (the d x (d+1) form used
    by the score; the reference category's row is redundant since columns sum
    to zero).
    """
    q = np.asarray(p, dtype=float).ravel()
    D = np.diag(q) - np.outer(q, q)
    return D[:-1, :] if truncated else D


def _delta_star_rows(pi: np.ndarray) -> np.ndarray:
    """Stacked truncated delta matrices, shape (n, d, d+1)."""
    n, dp1 = pi.shape
    d = dp1 - 1
    eye = np.eye(d, dp1)
    return pi[:, :d, None] * (eye[None, :, :] - pi[:, None, :])


def renyi_divergence(pi, y, alpha) -> float:
    """Renyi pseudodistance between a probability vector and an indicator.

    For alpha > 0:

        (1/(a+1)) log sum pi^(a+1) + (1/(a(a+1))) log sum y^(a+1)
            - (1/a) log sum pi^a y

    which is nonnegative and zero iff pi == y.  The alpha = 0 limit is the
    Kullback-Leibler divergence sum y log(y/pi) with the 0 log 0 = 0
    convention (for one-hot y that is -log pi at the observed category).
    ``y`` may be any point of the probability simplex.
    """
    a = check_alpha(alpha)
    p = np.asarray(pi, dtype=float).ravel()
    t = np.asarray(y, dtype=float).ravel()
    if p.shape != t.shape:
        raise ValueError("pi and y must have the same length")
    if a == 0.0:
        mask = t > 0.0
        return float(np.sum(t[mask] * (np.log(t[mask]) - np.log(np.maximum(p[mask], PROB_FLOOR)))))
    term_p = np.log(np.sum(_pow(p, a + 1.0))) / (a + 1.0)
    # y is an indicator (or simplex) vector, not a fitted probability: its
    # exact zeros must stay zero, so no floor before the power here.
    term_y = np.log(np.sum(np.where(t > 0.0, t, 1.0) ** (a + 1.0) * (t > 0.0))) / (
        a * (a + 1.0)
    )
    cross = np.log(np.maximum(np.sum(_pow(p, a) * t), PROB_FLOOR)) / a
    return float(term_p + term_y - cross)


def power_sums(pi, y, alpha):
    """Gamma and Upsilon for one row or a batch.

    Gamma = sum_j pi_j^(alpha+1) and Upsilon = sum_j pi_j^alpha y_j; both are
    identically 1 at alpha = 0.  Accepts (d+1,) vectors or (n, d+1) arrays
    and returns floats or (n,) arrays accordingly.
    """
    a = check_alpha(alpha)
    p = np.asarray(pi, dtype=float)
    t = np.asarray(y, dtype=float)
    single = p.ndim == 1
    p2 = np.atleast_2d(p)
    t2 = np.atleast_2d(t)
    gamma = np.sum(_pow(p2, a + 1.0), axis=1)
    upsilon = np.sum(_pow(p2, a) * t2, axis=1)
    if single:
        return float(gamma[0]), float(upsilon[0])
    return gamma, upsilon


def row_objective(pi, y, alpha):
    """Per-row objective s.

    alpha > 0: Upsilon / Gamma^(alpha/(1+alpha)), which equals
    exp(-alpha * renyi_divergence) for one-hot y.  alpha = 0: the per-row
    log-likelihood sum_j y_j log pi_j.  Vectorized like ``power_sums``.
    """
    a = check_alpha(alpha)
    p = np.asarray(pi, dtype=float)
    t = np.asarray(y, dtype=float)
    single = p.ndim == 1
    p2 = np.atleast_2d(p)
    t2 = np.atleast_2d(t)
    if a == 0.0:
        vals = np.sum(t2 * np.log(np.maximum(p2, PROB_FLOOR)), axis=1)
    else:
        gamma, upsilon = power_sums(p2, t2, a)
        vals = upsilon * np.exp(-(a / (1.0 + a)) * np.log(gamma))
    return float(vals[0]) if single else vals


def objective(design, response, beta, alpha) -> float:
    """Sample objective H: the mean of ``row_objective`` over the data."""
    X = check_design(design)
    Y = check_response(response, n_rows=X.shape[0])
    pi = category_probabilities(X, beta)
    return float(np.mean(row_objective(pi, Y, alpha)))


def score_matrix(design, response, beta, alpha) -> np.ndarray:
    """Per-row gradient of the row objective, shape (n, d(k+1)).

    Row i is the exact gradient of s(pi_i, y_i, alpha) with respect to the
    flat coefficient vector.  The response argument may be any vector in the
    probability simplex per row (used by the influence diagnostics), not just
    one-hot indicators.
    """
    X = check_design(design)
    Y = np.asarray(response, dtype=float)
    if Y.ndim == 1:
        Y = Y.reshape(1, -1)
    if Y.shape[0] != X.shape[0]:
        raise ValueError(
            f"design has {X.shape[0]} rows but response has {Y.shape[0]}"
        )
    a = check_alpha(alpha)
    b = check_beta(beta, X.shape[1], n_categories=Y.shape[1])
    pi = category_probabilities(X, b)
    n, dp1 = pi.shape
    d = dp1 - 1

    if a == 0.0:
        cat = Y[:, :d] - pi[:, :d]
    else:
        gamma = np.sum(_pow(pi, a + 1.0), axis=1)
        upsilon = np.sum(_pow(pi, a) * Y, axis=1)
        # u = diag^{alpha-1}(pi) [y - (Upsilon/Gamma) pi], then the truncated
        # delta matrix applied per row: (Delta* u)_j = pi_j (u_j - pi.u).
        u = _pow(pi, a - 1.0) * (Y - (upsilon / gamma)[:, None] * pi)
        pu = np.sum(pi * u, axis=1)
        cat = pi[:, :d] * (u[:, :d] - pu[:, None])
        cat *= (a * np.exp(-(a / (1.0 + a)) * np.log(gamma)))[:, None]
    # category-major flatten of cat[i] (length d) kron x_i (length k+1)
    return (cat[:, :, None] * X[:, None, :]).reshape(n, -1)


def score_vector(x, y, beta, alpha) -> np.ndarray:
    """Gradient of the row objective for a single row, length d(k+1)."""
    x1 = np.asarray(x, dtype=float).ravel()
    return score_matrix(x1.reshape(1, -1), y, beta, alpha)[0]


def mean_score(design, response, beta, alpha) -> np.ndarray:
    """Gradient of ``objective``: mean of the score rows."""
    return score_matrix(design, response, beta, alpha).mean(axis=0)
