"""Data-driven tuning-parameter choice by estimated mean squared error.

The criterion follows Warwick and Jones: for each candidate alpha, the
estimated MSE is the squared distance from a pilot fit (the bias proxy) plus
the trace of the asymptotic covariance scaled by the sample size (the
variance term),

    MSE(alpha) = ||beta_alpha - beta_pilot||^2 + trace(V_alpha) / n,

minimized over a fine grid.  An optional refinement loop re-uses the winner
as the next pilot until it stabilizes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import covariance as _covariance
from . import estimation as _estimation
from ._validation import check_design, check_response

__all__ = ["TuningGrid", "TuningEntry", "TuningResult", "select_alpha"]


@dataclass
class TuningGrid:
    """Candidate alphas (ascending, default 0 to 0.7 by 0.01) and the pilot."""

    alpha_max: float = 0.7
    step: float = 0.01
    pilot_alpha: float = 0.5
    alphas: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        if self.step <= 0.0:
            raise ValueError("grid step must be positive")
        if self.alpha_max < 0.0 or self.pilot_alpha < 0.0:
            raise ValueError("alphas must be nonnegative")
        count = int(round(self.alpha_max / self.step))
        self.alphas = np.round(np.arange(count + 1) * self.step, 10)


@dataclass
class TuningEntry:
    alpha: float
    mse: float
    squared_bias: float
    variance_term: float
    converged: bool
    message: str = ""


@dataclass
class TuningResult:
    alpha_star: float
    table: list
    pilot_alpha: float
    pilot_beta: np.ndarray
    iterations: int = 1

    def failed_alphas(self) -> list:
        return [e.alpha for e in self.table if not e.converged]


def _mse_at(X, Y, alpha, pilot_beta, warm, options) -> TuningEntry:
    opts = _estimation.FitOptions(
        initializer="user_supplied" if warm is not None else options.initializer,
        beta_start=warm,
        max_iterations=options.max_iterations,
        gradient_tolerance=options.gradient_tolerance,
        step_tolerance=options.step_tolerance,
        restarts=options.restarts,
        restart_seed=options.restart_seed,
        compute_covariance=False,
    )
    try:
        res = _estimation.fit(X, Y, alpha=alpha, options=opts)
        if not res.converged:
            return TuningEntry(alpha, np.inf, np.inf, np.inf, False, res.message), None
        v = _covariance.sandwich_covariance(X, res.beta_hat, alpha).v
    except (_estimation.SeparationError, _covariance.SingularCurvatureError) as exc:
        return TuningEntry(alpha, np.inf, np.inf, np.inf, False, str(exc)), None
    bias2 = float(np.sum((res.beta_hat - pilot_beta) ** 2))
    var = float(np.trace(v)) / X.shape[0]
    return TuningEntry(alpha, bias2 + var, bias2, var, True, ""), res.beta_hat


def select_alpha(
    design,
    response,
    grid: TuningGrid | None = None,
    options: _estimation.FitOptions | None = None,
    refine: bool = False,
    max_refinements: int = 5,
) -> TuningResult:
    """Pick alpha minimizing the estimated MSE against a pilot fit.

    Grid points whose fit fails are kept in the table with infinite MSE and
    ``converged=False``; ties go to the smallest alpha.  With ``refine`` the
    winner becomes the next pilot and the scan repeats until the choice
    stabilizes (at most ``max_refinements`` rounds).
    """
    X = check_design(design)
    Y = check_response(response, n_rows=X.shape[0])
    if grid is None:
        grid = TuningGrid()
    if options is None:
        options = _estimation.FitOptions()

    pilot_alpha = grid.pilot_alpha
    iterations = 0
    alpha_star = None
    while True:
        iterations += 1
        pilot = _estimation.fit(
            X,
            Y,
            alpha=pilot_alpha,
            options=_estimation.FitOptions(
                initializer=options.initializer,
                max_iterations=options.max_iterations,
                gradient_tolerance=options.gradient_tolerance,
                step_tolerance=options.step_tolerance,
                restarts=options.restarts,
                restart_seed=options.restart_seed,
                compute_covariance=False,
            ),
        )
        if not pilot.converged:
            raise _estimation.NonConvergenceError(
                f"pilot fit at alpha={pilot_alpha} did not converge: {pilot.message}"
            )
        table = []
        warm = None
        for a in grid.alphas:
            entry, beta_a = _mse_at(X, Y, float(a), pilot.beta_hat, warm, options)
            table.append(entry)
            if beta_a is not None:
                warm = beta_a
        finite = [e for e in table if np.isfinite(e.mse)]
        if not finite:
            raise _estimation.NonConvergenceError(
                "no grid point produced a converged fit"
            )
        best = min(finite, key=lambda e: (e.mse, e.alpha))
        previous = alpha_star
        alpha_star = best.alpha
        done = (
            not refine
            or iterations >= max_refinements
            or (previous is not None and previous == alpha_star)
            or alpha_star == pilot_alpha
        )
        if done:
            return TuningResult(
                alpha_star=alpha_star,
                table=table,
                pilot_alpha=pilot_alpha,
                pilot_beta=pilot.beta_hat,
                iterations=iterations,
            )
        pilot_alpha = alpha_star
