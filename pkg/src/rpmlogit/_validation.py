"""Input validation helpers shared across the package.

Every public entry point funnels its array arguments through these checks so
error messages are consistent and the numerical code can assume clean inputs.
"""
from __future__ import annotations

import warnings

import numpy as np

__all__ = [
    "check_design",
    "check_response",
    "check_beta",
    "check_alpha",
    "block_count",
]


def check_design(design, *, allow_no_intercept: bool = False) -> np.ndarray:
    """Validate a design matrix: 2-d, finite, intercept column of ones first.

    Returns a float64 C-contiguous copy-on-need array of shape (n, k+1).
    """
    X = np.asarray(design, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise ValueError(f"design must be 2-dimensional, got ndim={X.ndim}")
    if X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"design has empty shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("design contains NaN or Inf entries")
    if not allow_no_intercept and not np.all(X[:, 0] == 1.0):
        raise ValueError("first design column must be the constant 1 (intercept)")
    return np.ascontiguousarray(X)


def check_response(response, *, n_rows: int | None = None) -> np.ndarray:
    """Validate a one-hot response matrix of shape (n, d+1)."""
    Y = np.asarray(response, dtype=float)
    if Y.ndim != 2:
        raise ValueError(f"response must be 2-dimensional one-hot, got ndim={Y.ndim}")
    if Y.shape[1] < 2:
        raise ValueError("response needs at least 2 category columns")
    if n_rows is not None and Y.shape[0] != n_rows:
        raise ValueError(
            f"design has {n_rows} rows but response has {Y.shape[0]}"
        )
    if not np.all((Y == 0.0) | (Y == 1.0)):
        raise ValueError("response entries must be 0 or 1")
    if not np.all(Y.sum(axis=1) == 1.0):
        bad = int(np.flatnonzero(Y.sum(axis=1) != 1.0)[0])
        raise ValueError(f"response row {bad} is not one-hot (must sum to exactly 1)")
    return np.ascontiguousarray(Y)


def check_beta(beta, n_features: int, *, n_categories: int | None = None) -> np.ndarray:
    """Validate a flat coefficient vector of length d*(k+1).

    ``n_features`` is k+1 (columns of the design).  When ``n_categories``
    (d+1) is known the length is checked exactly; otherwise it only has to be
    a positive multiple of ``n_features``.
    """
    b = np.asarray(beta, dtype=float).ravel()
    if b.size == 0 or b.size % n_features != 0:
        raise ValueError(
            f"coefficient vector length {b.size} is not a positive multiple of "
            f"the design width {n_features}"
        )
    if n_categories is not None and b.size != (n_categories - 1) * n_features:
        raise ValueError(
            f"coefficient vector length {b.size} does not match "
            f"{n_categories - 1} blocks of {n_features}"
        )
    if not np.all(np.isfinite(b)):
        raise ValueError("coefficient vector contains NaN or Inf")
    return b


def check_alpha(alpha) -> float:
    """Validate the tuning parameter: a finite nonnegative real."""
    a = float(alpha)
    if not np.isfinite(a) or a < 0.0:
        raise ValueError(f"tuning parameter must be >= 0, got {alpha!r}")
    return a


def block_count(beta: np.ndarray, n_features: int) -> int:
    """Number of non-reference categories d implied by (beta, design width)."""
    return beta.size // n_features


def warn_if_underdetermined(n: int, p: int) -> None:
    if n <= p:
        warnings.warn(
            f"n={n} rows with p={p} free coefficients; estimates may be unstable",
            stacklevel=3,
        )
