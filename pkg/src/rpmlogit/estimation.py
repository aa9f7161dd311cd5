"""Numerical maximization of the sample objective and classification.

The maximizer is a quasi-Newton (BFGS) ascent with a backtracking Armijo line
search.  The objective can be non-concave away from the optimum for larger
tuning parameters, so fits at alpha > 0 warm-start from the alpha = 0
solution by default, and a handful of randomized restarts around the warm
start are attempted when the primary attempt fails to converge.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import covariance as _covariance
from ._validation import (
    check_alpha,
    check_design,
    check_response,
    warn_if_underdetermined,
)
from .model import _pow, _probabilities_raw

__all__ = [
    "FitOptions",
    "FitResult",
    "SeparationError",
    "NonConvergenceError",
    "fit",
    "classify",
]

# Iterates whose coefficient norm passes this are treated as diverging, the
# classic signature of (quasi-)separated data.
SEPARATION_NORM = 1e4

_INITIALIZERS = ("zeros", "mle_warm_start", "user_supplied")


class SeparationError(RuntimeError):
    """Raised when the coefficient norm diverges during a fit."""


class NonConvergenceError(RuntimeError):
    """Raised by callers that require a converged fit."""


@dataclass
class FitOptions:
    """Knobs for ``fit``.

    gradient_tolerance applies to the infinity norm of the mean score;
    step_tolerance to the infinity norm of the accepted parameter step.
    ``restarts`` randomized retries (normal perturbations of scale 0.5 around
    the starting point) are attempted only if the primary attempt does not
    converge; ``restart_seed`` makes them reproducible.
    """

    max_iterations: int = 200
    gradient_tolerance: float = 1e-8
    step_tolerance: float = 1e-10
    initializer: str = "mle_warm_start"
    beta_start: np.ndarray | None = None
    restarts: int = 3
    restart_seed: int = 0
    compute_covariance: bool = True

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.gradient_tolerance <= 0 or self.step_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.initializer not in _INITIALIZERS:
            raise ValueError(f"initializer must be one of {_INITIALIZERS}")
        if self.restarts < 0:
            raise ValueError("restarts must be >= 0")


@dataclass
class FitResult:
    beta_hat: np.ndarray
    alpha: float
    objective: float
    gradient_norm: float
    iterations: int
    converged: bool
    n_obs: int = 0
    covariance_v: np.ndarray | None = None
    restarts_used: int = 0
    message: str = ""


def _value(X: np.ndarray, Y: np.ndarray, beta: np.ndarray, alpha: float, d: int) -> float:
    pi = _probabilities_raw(X, beta.reshape(d, -1))
    if alpha == 0.0:
        return float(np.mean(np.sum(Y * np.log(np.maximum(pi, 1e-12)), axis=1)))
    gamma = np.sum(_pow(pi, alpha + 1.0), axis=1)
    upsilon = np.sum(_pow(pi, alpha) * Y, axis=1)
    return float(np.mean(upsilon * np.exp(-(alpha / (1.0 + alpha)) * np.log(gamma))))


def _value_and_grad(
    X: np.ndarray, Y: np.ndarray, beta: np.ndarray, alpha: float, d: int
) -> tuple[float, np.ndarray]:
    """Objective and its gradient sharing one probability evaluation."""
    n = X.shape[0]
    pi = _probabilities_raw(X, beta.reshape(d, -1))
    if alpha == 0.0:
        val = float(np.mean(np.sum(Y * np.log(np.maximum(pi, 1e-12)), axis=1)))
        cat = Y[:, :d] - pi[:, :d]
    else:
        gamma = np.sum(_pow(pi, alpha + 1.0), axis=1)
        upsilon = np.sum(_pow(pi, alpha) * Y, axis=1)
        scale = np.exp(-(alpha / (1.0 + alpha)) * np.log(gamma))
        val = float(np.mean(upsilon * scale))
        u = _pow(pi, alpha - 1.0) * (Y - (upsilon / gamma)[:, None] * pi)
        pu = np.sum(pi * u, axis=1)
        cat = pi[:, :d] * (u[:, :d] - pu[:, None]) * (alpha * scale)[:, None]
    grad = (cat[:, :, None] * X[:, None, :]).reshape(n, -1).mean(axis=0)
    return val, grad


def _bfgs_ascent(
    X: np.ndarray,
    Y: np.ndarray,
    beta_start: np.ndarray,
    alpha: float,
    opts: FitOptions,
) -> tuple[np.ndarray, float, float, int, bool, str]:
    """One ascent run.  Returns (beta, value, grad_norm, iters, converged, msg)."""
    d = Y.shape[1] - 1
    p = beta_start.size
    beta = beta_start.astype(float).copy()
    if float(np.linalg.norm(beta)) > SEPARATION_NORM:
        raise SeparationError(
            f"starting coefficient norm {np.linalg.norm(beta):.3g} exceeds "
            f"{SEPARATION_NORM:.0e}"
        )
    f, g = _value_and_grad(X, Y, beta, alpha, d)
    h_inv = np.eye(p)
    iterations = 0
    message = ""
    for _ in range(opts.max_iterations):
        gnorm = float(np.max(np.abs(g)))
        if gnorm <= opts.gradient_tolerance:
            return beta, f, gnorm, iterations, True, "gradient tolerance reached"
        direction = h_inv @ g
        slope = float(direction @ g)
        if slope <= 0.0:
            # stale curvature information; fall back to steepest ascent
            h_inv = np.eye(p)
            direction = g
            slope = float(g @ g)
        step = 1.0
        accepted = False
        while step * float(np.max(np.abs(direction))) > 1e-16:
            cand = beta + step * direction
            f_cand = _value(X, Y, cand, alpha, d)
            if f_cand >= f + 1e-4 * step * slope:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            message = "line search failed to make progress"
            break
        if float(np.linalg.norm(cand)) > SEPARATION_NORM:
            raise SeparationError(
                "coefficient norm diverged past "
                f"{SEPARATION_NORM:.0e} (possible data separation)"
            )
        f_new, g_new = _value_and_grad(X, Y, cand, alpha, d)
        s = cand - beta
        y_min = g - g_new  # gradient difference of the negated objective
        sy = float(s @ y_min)
        if sy > 1e-12 * float(np.linalg.norm(s)) * max(float(np.linalg.norm(y_min)), 1e-300):
            rho = 1.0 / sy
            sy_outer = np.outer(s, y_min)
            h_inv = (
                h_inv
                - rho * (sy_outer @ h_inv + h_inv @ sy_outer.T)
                + rho * rho * float(y_min @ h_inv @ y_min) * np.outer(s, s)
                + rho * np.outer(s, s)
            )
        beta, f, g = cand, f_new, g_new
        iterations += 1
        if float(np.max(np.abs(s))) <= opts.step_tolerance:
            message = "step tolerance reached"
            break
    gnorm = float(np.max(np.abs(g)))
    converged = gnorm <= opts.gradient_tolerance
    if not message:
        message = "iteration limit reached"
    if converged:
        message = "gradient tolerance reached"
    return beta, f, gnorm, iterations, converged, message


def fit(design, response, alpha: float = 0.0, options: FitOptions | None = None) -> FitResult:
    """Maximize the sample objective at the given tuning parameter.

    Returns a FitResult whose ``converged`` flag certifies that the infinity
    norm of the mean score is below ``gradient_tolerance``.  At alpha = 0
    this is maximum likelihood.  Raises SeparationError when iterates
    diverge, which is the usual symptom of separated categories.
    """
    opts = options or FitOptions()
    a = check_alpha(alpha)
    X = check_design(design)
    Y = check_response(response, n_rows=X.shape[0])
    d = Y.shape[1] - 1
    p = d * X.shape[1]
    warn_if_underdetermined(X.shape[0], p)

    if opts.initializer == "user_supplied":
        if opts.beta_start is None:
            raise ValueError("initializer='user_supplied' requires beta_start")
        start = np.asarray(opts.beta_start, dtype=float).ravel().copy()
        if start.size != p:
            raise ValueError(f"beta_start has length {start.size}, expected {p}")
    elif opts.initializer == "mle_warm_start" and a > 0.0:
        warm_opts = FitOptions(
            max_iterations=opts.max_iterations,
            gradient_tolerance=opts.gradient_tolerance,
            step_tolerance=opts.step_tolerance,
            initializer="zeros",
            restarts=opts.restarts,
            restart_seed=opts.restart_seed,
            compute_covariance=False,
        )
        start = fit(X, Y, 0.0, warm_opts).beta_hat
    else:
        start = np.zeros(p)

    beta, f, gnorm, iters, converged, message = _bfgs_ascent(X, Y, start, a, opts)
    restarts_used = 0
    if not converged and opts.restarts > 0:
        rng = np.random.default_rng(opts.restart_seed)
        best = (beta, f, gnorm, iters, converged, message)
        for _ in range(opts.restarts):
            restarts_used += 1
            jittered = start + rng.normal(scale=0.5, size=p)
            try:
                attempt = _bfgs_ascent(X, Y, jittered, a, opts)
            except SeparationError:
                continue
            better = (attempt[4] and not best[4]) or (
                attempt[4] == best[4] and attempt[1] > best[1]
            )
            if better:
                best = attempt
            if best[4]:
                break
        beta, f, gnorm, iters, converged, message = best

    result = FitResult(
        beta_hat=beta,
        alpha=a,
        objective=f,
        gradient_norm=gnorm,
        iterations=iters,
        converged=converged,
        n_obs=X.shape[0],
        restarts_used=restarts_used,
        message=message,
    )
    if opts.compute_covariance:
        result.covariance_v = _covariance.sandwich_covariance(X, beta, a).v
    return result


def classify(design, beta) -> np.ndarray:
    """Predicted category index per row (0-based), highest probability wins.

    Ties resolve to the lowest category index.
    """
    X = check_design(design)
    from .model import category_probabilities

    pi = category_probabilities(X, beta)
    return np.argmax(pi, axis=1)
