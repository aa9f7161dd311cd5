"""Sandwich covariance of the estimator and asymptotic relative efficiency.

For tuning parameter alpha the estimator behaves like an M-estimator with

    phi   = -(1/n) sum_i E[ d^2 s_i / dbeta dbeta^T ]   (curvature)
    omega =  (1/n) sum_i Var[ d s_i / dbeta ]           (score variance)

and asymptotic covariance V = phi^-1 omega phi^-1 for sqrt(n)(beta_hat -
beta).  Both expectations are over the category of each response at fixed
design row, so they reduce to finite sums with closed forms; at alpha = 0
both collapse to the Fisher information of the multinomial logit and V is
its inverse.  The ratio V relative to the alpha = 0 case gives the
coordinatewise efficiency cost of robustness.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import check_alpha, check_beta, check_design
from .model import _delta_star_rows, _pow, _probabilities_raw

__all__ = [
    "SandwichMatrices",
    "SingularCurvatureError",
    "xi_vector",
    "j_matrix",
    "curvature_matrix",
    "score_variance_matrix",
    "sandwich_covariance",
    "relative_efficiency",
]

CONDITION_LIMIT = 1e12


class SingularCurvatureError(np.linalg.LinAlgError):
    """Curvature matrix is numerically singular (condition number too large)."""

    def __init__(self, cond: float):
        self.condition_number = cond
        super().__init__(
            f"curvature matrix condition number {cond:.3e} exceeds {CONDITION_LIMIT:.0e}"
        )


def _prepare(design, beta, alpha):
    X = check_design(design)
    a = check_alpha(alpha)
    b = check_beta(beta, X.shape[1])
    d = b.size // X.shape[1]
    pi = _probabilities_raw(X, b.reshape(d, -1))
    return X, b, a, d, pi


def _fisher_blocks(pi: np.ndarray, d: int) -> np.ndarray:
    """Per-row Fisher category blocks diag(pi*) - pi* pi*^T, shape (n, d, d)."""
    head = pi[:, :d]
    blocks = -head[:, :, None] * head[:, None, :]
    idx = np.arange(d)
    blocks[:, idx, idx] += head
    return blocks


def _assemble(blocks: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Average of per-row kron(category block, x x^T), flattened to (p, p)."""
    n, d = blocks.shape[:2]
    kp1 = X.shape[1]
    out = np.einsum("njl,na,nb->jalb", blocks, X, X, optimize=True) / n
    return out.reshape(d * kp1, d * kp1)


def xi_vector(x, beta, alpha) -> np.ndarray:
    """Per-row mean-score building block, length p.

    The truncated delta matrix applied to the alpha-th power of the
    probability vector, kronecker the covariate row.  Identically zero at
    alpha = 0 (delta rows sum to zero) and at any alpha when the
    probabilities are uniform.
    """
    x1 = np.asarray(x, dtype=float).ravel().reshape(1, -1)
    X, b, a, d, pi = _prepare(x1, beta, alpha)
    dstar = _delta_star_rows(pi)[0]
    cat = dstar @ _pow(pi[0], a)
    return np.kron(cat, X[0])


def j_matrix(x, beta, alpha) -> np.ndarray:
    """Per-row power-weighted information kernel, p x p symmetric PSD.

    Delta* diag^(alpha-1)(pi) Delta*^T kron x x^T; at alpha = 0 it collapses
    to the row's Fisher information block.
    """
    x1 = np.asarray(x, dtype=float).ravel().reshape(1, -1)
    X, b, a, d, pi = _prepare(x1, beta, alpha)
    dstar = _delta_star_rows(pi)[0]
    inner = dstar @ np.diag(_pow(pi[0], a - 1.0)) @ dstar.T
    return np.kron(inner, np.outer(X[0], X[0]))


def curvature_matrix(design, beta, alpha) -> np.ndarray:
    """Negative mean expected Hessian of the row objective, shape (p, p)."""
    X, b, a, d, pi = _prepare(design, beta, alpha)
    if a == 0.0:
        return _assemble(_fisher_blocks(pi, d), X)
    dstar = _delta_star_rows(pi)
    gamma = np.sum(_pow(pi, a + 1.0), axis=1)
    j_blocks = np.einsum("njm,nm,nlm->njl", dstar, _pow(pi, a - 1.0), dstar, optimize=True)
    xi = np.einsum("njm,nm->nj", dstar, _pow(pi, a))
    blocks = j_blocks - xi[:, :, None] * xi[:, None, :] / gamma[:, None, None]
    blocks *= (a * np.exp(-(a / (1.0 + a)) * np.log(gamma)))[:, None, None]
    return _assemble(blocks, X)


def score_variance_matrix(design, beta, alpha) -> np.ndarray:
    """Mean per-row variance of the score, shape (p, p); symmetric PSD."""
    X, b, a, d, pi = _prepare(design, beta, alpha)
    if a == 0.0:
        return _assemble(_fisher_blocks(pi, d), X)
    dstar = _delta_star_rows(pi)
    gamma = np.sum(_pow(pi, a + 1.0), axis=1)
    gamma2 = np.sum(_pow(pi, 2.0 * a + 1.0), axis=1)
    c = a / (1.0 + a)
    j2_blocks = np.einsum(
        "njm,nm,nlm->njl", dstar, _pow(pi, 2.0 * a - 1.0), dstar, optimize=True
    )
    xi_a = np.einsum("njm,nm->nj", dstar, _pow(pi, a))
    xi_2a = np.einsum("njm,nm->nj", dstar, _pow(pi, 2.0 * a))
    cross = (
        (gamma2 / gamma)[:, None, None] * (xi_a[:, :, None] * xi_a[:, None, :])
        - xi_2a[:, :, None] * xi_a[:, None, :]
        - xi_a[:, :, None] * xi_2a[:, None, :]
    )
    blocks = (
        np.exp(-2.0 * c * np.log(gamma))[:, None, None] * j2_blocks
        + np.exp((-1.0 - 2.0 * c) * np.log(gamma))[:, None, None] * cross
    )
    blocks *= a * a
    return _assemble(blocks, X)


@dataclass
class SandwichMatrices:
    phi: np.ndarray
    omega: np.ndarray
    v: np.ndarray


def sandwich_covariance(design, beta, alpha) -> SandwichMatrices:
    """phi, omega and V = phi^-1 omega phi^-1 at the supplied coefficients.

    The inverse is never formed explicitly; V comes from two symmetric
    solves.  Raises SingularCurvatureError when phi is ill-conditioned.
    """
    phi = curvature_matrix(design, beta, alpha)
    omega = score_variance_matrix(design, beta, alpha)
    cond = float(np.linalg.cond(phi))
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularCurvatureError(cond)
    half = np.linalg.solve(phi, omega)
    v = np.linalg.solve(phi, half.T).T
    v = 0.5 * (v + v.T)
    return SandwichMatrices(phi=phi, omega=omega, v=v)


def relative_efficiency(design, beta, alpha) -> np.ndarray:
    """Coordinatewise asymptotic efficiency relative to alpha = 0.

    Entry j is V_0[j, j] / V_alpha[j, j]; identically 1 at alpha = 0 and
    below 1 (up to sampling noise in the design) otherwise.
    """
    v0 = sandwich_covariance(design, beta, 0.0).v
    va = sandwich_covariance(design, beta, alpha).v
    return np.diag(v0) / np.diag(va)
