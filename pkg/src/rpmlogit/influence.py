"""Influence diagnostics for the estimator and the Wald-type tests.

First-order influence functions quantify the standardized asymptotic bias
from an infinitesimal contamination of one (or every) response distribution.
For this model they have the closed form

    IF = curvature^-1 . score(x, t),

where the score is evaluated at the contaminating simplex point t instead of
the observed indicator.  The second-order influence of the Wald statistic is
the induced quadratic form.  The module also provides the outlying-predictor
scan: along a suitable ray the score norm grows proportionally to the
predictor norm, so the estimator is not B-robust in the covariates (while it
stays bounded over the finite set of possible responses).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import covariance as _covariance
from . import model as _model
from ._validation import check_alpha, check_beta, check_design
from .hypothesis import LinearHypothesis

__all__ = [
    "ContaminationPoint",
    "influence_single",
    "influence_all",
    "wald_influence",
    "ray_direction",
    "ray_base_point",
    "RayScanResult",
    "predictor_ray_scan",
    "response_score_bound",
]

SIMPLEX_TOL = 1e-8


def _check_simplex_rows(t, n_rows: int | None = None) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if n_rows is not None and arr.shape[0] != n_rows:
        raise ValueError(f"expected {n_rows} contamination rows, got {arr.shape[0]}")
    if np.any(arr < 0.0) or not np.all(np.isfinite(arr)):
        raise ValueError("contamination points must be finite and nonnegative")
    sums = arr.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > SIMPLEX_TOL):
        raise ValueError("contamination points must lie on the probability simplex")
    return arr


@dataclass
class ContaminationPoint:
    """A contaminating distribution: one row (``index`` set) or every row.

    ``t`` is a single length-(d+1) simplex point when ``index`` is a row
    number, or an (n, d+1) array of per-row points when ``index`` is None
    (contamination in all directions).
    """

    t: np.ndarray
    index: int | None = None

    def __post_init__(self) -> None:
        self.t = np.asarray(self.t, dtype=float)
        if self.index is not None:
            if self.t.ndim != 1:
                raise ValueError("a single-row contamination needs a 1-D point t")
            if self.index < 0:
                raise ValueError("row index must be nonnegative")
        elif self.t.ndim != 2:
            raise ValueError("all-row contamination needs one simplex point per row")
        _check_simplex_rows(self.t)


def influence_single(design, beta, alpha, index: int, t) -> np.ndarray:
    """Influence of contaminating row ``index`` alone at the simplex point t."""
    X = check_design(design)
    if not 0 <= index < X.shape[0]:
        raise ValueError(f"row index {index} outside 0..{X.shape[0] - 1}")
    a = check_alpha(alpha)
    b = check_beta(beta, X.shape[1])
    t_row = _check_simplex_rows(t)[0]
    phi = _covariance.curvature_matrix(X, b, a)
    psi = _model.score_vector(X[index], t_row, b, a)
    return _solve_curvature(phi, psi)


def influence_all(design, beta, alpha, t_rows) -> np.ndarray:
    """Influence of contaminating every row i at its own point t_i."""
    X = check_design(design)
    a = check_alpha(alpha)
    b = check_beta(beta, X.shape[1])
    T = _check_simplex_rows(t_rows, n_rows=X.shape[0])
    phi = _covariance.curvature_matrix(X, b, a)
    psi_total = _model.score_matrix(X, T, b, a).sum(axis=0)
    return _solve_curvature(phi, psi_total)


def _solve_curvature(phi: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    cond = np.linalg.cond(phi)
    if not np.isfinite(cond) or cond > _covariance.CONDITION_LIMIT:
        raise _covariance.SingularCurvatureError(cond)
    return np.linalg.solve(phi, rhs)


def influence_for(design, beta, alpha, contamination: ContaminationPoint) -> np.ndarray:
    if contamination.index is None:
        return influence_all(design, beta, alpha, contamination.t)
    return influence_single(design, beta, alpha, contamination.index, contamination.t)


def wald_influence(
    design, beta, alpha, contamination: ContaminationPoint, hypothesis: LinearHypothesis
) -> float:
    """Second-order influence of the Wald statistic under the contamination.

    Twice the quadratic form of the estimator influence in the metric
    L^T (L V L^T)^-1 L; nonnegative by construction.
    """
    X = check_design(design)
    a = check_alpha(alpha)
    b = check_beta(beta, X.shape[1])
    iff = influence_for(X, b, a, contamination)
    v = _covariance.sandwich_covariance(X, b, a).v
    L = hypothesis.L
    middle = L @ v @ L.T
    proj = L.T @ np.linalg.solve(middle, L @ iff)
    return float(2.0 * iff @ proj)


# ---------------------------------------------------------------------------
# outlying-predictor diagnostic


def _complement_basis(b1: np.ndarray) -> np.ndarray:
    """Orthonormal basis (columns) of the orthogonal complement of span{b1}."""
    k = b1.size
    norm = np.linalg.norm(b1)
    if norm < 1e-12:
        return np.eye(k)
    u, s, _ = np.linalg.svd(b1.reshape(-1, 1), full_matrices=True)
    return u[:, 1:]


def ray_direction(beta, n_features: int, seed: int = 0, attempts: int = 500) -> np.ndarray:
    """Direction v (zero intercept coordinate) for the outlying-predictor ray.

    The non-intercept part is orthogonal to the first category's slope vector
    and makes a strictly negative inner product with every other category's
    slopes, so that along ``x0 + t v`` the first linear predictor is pinned
    while the rest diverge to minus infinity.  Requires at least two
    non-intercept covariates; raises ValueError when no such direction exists
    (for instance when some slope vector is parallel to the first).
    """
    b = check_beta(beta, n_features)
    B = b.reshape(-1, n_features)
    slopes = B[:, 1:]
    k = slopes.shape[1]
    if k < 2:
        raise ValueError("the outlying-predictor ray needs at least 2 covariates")

    basis = _complement_basis(slopes[0])
    others = slopes[1:]

    def full(w: np.ndarray) -> np.ndarray:
        v = np.zeros(n_features)
        v[1:] = w / np.linalg.norm(w)
        return v

    def admissible(w: np.ndarray) -> bool:
        if np.linalg.norm(w) < 1e-12:
            return False
        if others.size == 0:
            return True
        margins = others @ (w / np.linalg.norm(w))
        return bool(np.all(margins < -1e-10))

    # deterministic candidate: steer away from the summed remaining slopes
    if others.size:
        cand = -basis @ (basis.T @ others.sum(axis=0))
        if admissible(cand):
            return full(cand)
    rng = np.random.default_rng(seed)
    for _ in range(attempts):
        w = basis @ rng.standard_normal(basis.shape[1])
        if admissible(w):
            return full(w)
        if admissible(-w):
            return full(-w)
    raise ValueError(
        "no ray direction separates the first category from the rest "
        "(slope vectors may be parallel)"
    )


def ray_base_point(beta, n_features: int) -> np.ndarray:
    """Design point x0 (intercept 1) with first linear predictor zero."""
    b = check_beta(beta, n_features)
    b1 = b.reshape(-1, n_features)[0]
    slope = b1[1:]
    nrm2 = float(slope @ slope)
    x0 = np.zeros(n_features)
    x0[0] = 1.0
    if nrm2 < 1e-24:
        if abs(b1[0]) > 1e-12:
            raise ValueError(
                "first category has zero slopes and nonzero intercept; "
                "no base point zeroes its linear predictor"
            )
        return x0
    x0[1:] = -b1[0] * slope / nrm2
    return x0


@dataclass
class RayScanResult:
    t_values: np.ndarray
    x_norms: np.ndarray
    score_norms: np.ndarray
    ratios: np.ndarray
    tail_constant: float  # empirical lower bound on ||score|| / ||x||

    def as_rows(self):
        return list(zip(self.x_norms, self.score_norms, self.ratios))


def predictor_ray_scan(
    beta,
    n_features: int,
    alpha,
    x0=None,
    v=None,
    t_values=None,
    category: int = 0,
) -> RayScanResult:
    """Score norm along an outlying-predictor ray, with one-hot response.

    Walks x_t = x0 + t v for growing t and records (||x||, ||score||, ratio).
    Under the default construction the ratio stabilizes above a positive
    constant (the tail minimum reported as ``tail_constant``), demonstrating
    that predictor outliers have unbounded influence for every alpha.
    """
    a = check_alpha(alpha)
    b = check_beta(beta, n_features)
    d = b.size // n_features
    if v is None:
        v = ray_direction(b, n_features)
    v = np.asarray(v, dtype=float).ravel()
    if x0 is None:
        x0 = ray_base_point(b, n_features)
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.size != n_features or v.size != n_features:
        raise ValueError("x0 and v must have one entry per design column")
    if t_values is None:
        t_values = np.geomspace(1.0, 1e4, 41)
    t_values = np.asarray(t_values, dtype=float)
    if not 0 <= category <= d:
        raise ValueError(f"category must be in 0..{d}")

    y = np.zeros(d + 1)
    y[category] = 1.0
    x_norms = np.empty(t_values.size)
    score_norms = np.empty(t_values.size)
    for j, t in enumerate(t_values):
        x = x0 + t * v
        x_norms[j] = np.linalg.norm(x)
        score_norms[j] = np.linalg.norm(_model.score_vector(x, y, b, a))
    ratios = score_norms / x_norms
    tail = max(1, t_values.size // 4)
    return RayScanResult(
        t_values=t_values,
        x_norms=x_norms,
        score_norms=score_norms,
        ratios=ratios,
        tail_constant=float(np.min(ratios[-tail:])),
    )


def response_score_bound(x, beta, alpha, n_categories: int) -> float:
    """Largest score norm over the one-hot responses at a fixed design point.

    Always finite: with the predictors held fixed there are only d+1 possible
    responses, so misspecified labels perturb the estimator boundedly.
    """
    a = check_alpha(alpha)
    x1 = np.asarray(x, dtype=float).ravel()
    b = check_beta(beta, x1.size)
    best = 0.0
    for j in range(n_categories):
        y = np.zeros(n_categories)
        y[j] = 1.0
        best = max(best, float(np.linalg.norm(_model.score_vector(x1, y, b, a))))
    return best
