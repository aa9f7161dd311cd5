"""Estimator-object interface in the scikit-learn style.

`RenyiLogit` wraps the functional fitting layer behind the familiar
fit/predict/predict_proba/score protocol with get_params/set_params, so it
drops into pipelines and grid searches that follow that convention.  There
is no scikit-learn dependency; the protocol is implemented directly.
"""
from __future__ import annotations

import numpy as np

from ._validation import check_design
from .covariance import sandwich_covariance
from .estimation import FitOptions, fit as _fit
from .model import category_probabilities

__all__ = ["RenyiLogit"]


class RenyiLogit:
    """Robust polytomous logistic regression classifier.

    Parameters mirror FitOptions; ``alpha`` is the robustness tuning
    parameter (0 gives maximum likelihood).  ``categories`` fixes the
    category order; the last one is the reference.  When omitted, categories
    are the sorted unique labels seen in fit.

    Attributes set by fit: ``classes_``, ``coef_`` (d rows of k+1
    coefficients, intercept first), ``beta_`` (flat), ``covariance_``,
    ``converged_``, ``n_iter_``, ``objective_``.
    """

    def __init__(
        self,
        alpha: float = 0.0,
        categories=None,
        max_iterations: int = 200,
        gradient_tolerance: float = 1e-8,
        step_tolerance: float = 1e-10,
        restarts: int = 3,
        restart_seed: int = 0,
        compute_covariance: bool = True,
    ):
        self.alpha = alpha
        self.categories = categories
        self.max_iterations = max_iterations
        self.gradient_tolerance = gradient_tolerance
        self.step_tolerance = step_tolerance
        self.restarts = restarts
        self.restart_seed = restart_seed
        self.compute_covariance = compute_covariance

    # -- sklearn protocol -------------------------------------------------

    _param_names = (
        "alpha",
        "categories",
        "max_iterations",
        "gradient_tolerance",
        "step_tolerance",
        "restarts",
        "restart_seed",
        "compute_covariance",
    )

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._param_names}

    def set_params(self, **params) -> "RenyiLogit":
        for key, value in params.items():
            if key not in self._param_names:
                raise ValueError(f"unknown parameter {key!r} for RenyiLogit")
            setattr(self, key, value)
        return self

    # -- data wrangling ----------------------------------------------------

    def _design(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise ValueError("X must be a 2-d array of predictors")
        with_intercept = np.column_stack([np.ones(X.shape[0]), X])
        return check_design(with_intercept)

    def _encode(self, y) -> np.ndarray:
        y = np.asarray(y)
        if y.ndim == 2:
            # already one-hot; categories default to column positions
            if self.categories is not None and len(self.categories) != y.shape[1]:
                raise ValueError("categories length does not match one-hot width")
            self.classes_ = np.asarray(
                self.categories
                if self.categories is not None
                else np.arange(y.shape[1])
            )
            return y.astype(float)
        labels = np.asarray(self.categories) if self.categories is not None else np.unique(y)
        index = {label: j for j, label in enumerate(labels)}
        if len(index) < 2:
            raise ValueError("need at least 2 categories")
        onehot = np.zeros((y.shape[0], len(labels)))
        for i, label in enumerate(y):
            j = index.get(label)
            if j is None:
                raise ValueError(f"label {label!r} not in categories {list(labels)}")
            onehot[i, j] = 1.0
        self.classes_ = labels
        return onehot

    # -- estimator API -----------------------------------------------------

    def fit(self, X, y) -> "RenyiLogit":
        design = self._design(X)
        onehot = self._encode(y)
        options = FitOptions(
            max_iterations=self.max_iterations,
            gradient_tolerance=self.gradient_tolerance,
            step_tolerance=self.step_tolerance,
            restarts=self.restarts,
            restart_seed=self.restart_seed,
            compute_covariance=False,
        )
        result = _fit(design, onehot, self.alpha, options)
        self.beta_ = result.beta_hat
        self.coef_ = result.beta_hat.reshape(-1, design.shape[1])
        self.converged_ = result.converged
        self.n_iter_ = result.iterations
        self.objective_ = result.objective
        self.gradient_norm_ = result.gradient_norm
        self.n_features_in_ = design.shape[1] - 1
        self.n_obs_ = design.shape[0]
        if self.compute_covariance:
            self.covariance_ = sandwich_covariance(design, self.beta_, self.alpha).v
        else:
            self.covariance_ = None
        return self

    def _check_fitted(self) -> None:
        if not hasattr(self, "beta_"):
            raise RuntimeError("this RenyiLogit instance is not fitted yet")

    def predict_proba(self, X) -> np.ndarray:
        self._check_fitted()
        return category_probabilities(self._design(X), self.beta_)

    def predict(self, X) -> np.ndarray:
        proba = self.predict_proba(X)
        return np.asarray(self.classes_)[np.argmax(proba, axis=1)]

    def score(self, X, y) -> float:
        """Mean accuracy on the given labels."""
        return float(np.mean(self.predict(X) == np.asarray(y)))

    def standard_errors(self) -> np.ndarray:
        """Approximate standard errors sqrt(diag(V)/n) from the last fit."""
        self._check_fitted()
        if self.covariance_ is None:
            raise RuntimeError("fit was run with compute_covariance=False")
        return np.sqrt(np.diag(self.covariance_) / self.n_obs_)

    def __repr__(self) -> str:
        params = ", ".join(f"{k}={getattr(self, k)!r}" for k in self._param_names)
        return f"RenyiLogit({params})"
