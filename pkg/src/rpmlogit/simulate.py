"""Monte Carlo harness: data generation, contamination, and study pipelines.

Datasets follow the model exactly: an intercept plus k standard-normal
covariates, responses drawn from the category probabilities at a fixed
coefficient vector.  Two contamination mechanisms are provided: swapping the
first and third conditional probabilities for a random subset of rows before
sampling (distributional contamination), and permuting observed labels
through a fixed category mapping (misclassification).  The study drivers
aggregate estimator accuracy and test level/power over replications.

Randomness uses the counter-based Philox generator with one spawned
substream per replication, so results are reproducible and independent of
any batching or execution order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import covariance as _covariance
from . import estimation as _estimation
from . import model as _model
from .hypothesis import LinearHypothesis, chi_square_quantile, wald_test

__all__ = [
    "SimConfig",
    "RelabelScheme",
    "SCHEME_FORWARD",
    "SCHEME_BACKWARD",
    "substream",
    "generate_dataset",
    "contaminate_swap",
    "relabel",
    "EstimatorStudyCell",
    "run_estimator_study",
    "TestStudyCell",
    "run_test_study",
    "misclassification_count",
]

DEFAULT_BETA0 = (0.0, -0.9, 0.1, 0.6, -1.2, 0.8)

# forward 3-cycle: category 1 -> 2 -> 3 -> 1; backward is its inverse
SCHEME_FORWARD = (1, 2, 0)
SCHEME_BACKWARD = (2, 0, 1)


@dataclass
class SimConfig:
    """Design of one simulation cell."""

    n: int
    k: int = 2
    d: int = 2
    beta0: np.ndarray = field(default_factory=lambda: np.array(DEFAULT_BETA0))
    q: float = 0.0
    replications: int = 1000
    seed: int = 0

    def __post_init__(self) -> None:
        self.beta0 = np.asarray(self.beta0, dtype=float).ravel()
        if self.n < 1 or self.k < 1 or self.d < 1 or self.replications < 1:
            raise ValueError("n, k, d, and replications must be positive")
        if self.beta0.size != self.d * (self.k + 1):
            raise ValueError(
                f"beta0 has {self.beta0.size} entries, expected d(k+1) = "
                f"{self.d * (self.k + 1)}"
            )
        if not 0.0 <= self.q < 1.0:
            raise ValueError("contamination fraction q must be in [0, 1)")


def substream(seed: int, index: int) -> np.random.Generator:
    """Philox generator for one replication, identical however runs are split."""
    child = np.random.SeedSequence(seed).spawn(index + 1)[index]
    return np.random.Generator(np.random.Philox(child))


def _sample_categories(pi: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    u = rng.random(pi.shape[0])
    return (u[:, None] > np.cumsum(pi, axis=1)).sum(axis=1)


def generate_dataset(config: SimConfig, rng: np.random.Generator):
    """Draw (design, response) from the model at config.beta0."""
    X = np.column_stack(
        [np.ones(config.n), rng.standard_normal((config.n, config.k))]
    )
    pi = _model.category_probabilities(X, config.beta0)
    cats = _sample_categories(pi, rng)
    Y = np.eye(config.d + 1)[cats]
    return X, Y


def contaminate_swap(config: SimConfig, rng: np.random.Generator):
    """Like generate_dataset, but ceil(qn) random rows have their first and
    third conditional probabilities interchanged before sampling.

    The positions refer to the probability vector written baseline first,
    the ordering used by standard multinomial-regression software: position
    one is the reference category and position j >= 2 is the (j-1)-th
    parameterized one.  Interchanging positions one and three therefore
    swaps the reference probability with that of the second parameterized
    category (internal columns d and 1).  Only this reading yields the
    contamination damage the Monte Carlo experiments are built around; see
    the study functions below.

    Returns (design, response, contaminated_row_indices).
    """
    if config.d + 1 < 3:
        raise ValueError("probability swap needs at least 3 categories")
    X = np.column_stack(
        [np.ones(config.n), rng.standard_normal((config.n, config.k))]
    )
    pi = _model.category_probabilities(X, config.beta0)
    m = math.ceil(config.q * config.n)
    idx = rng.choice(config.n, size=m, replace=False) if m else np.empty(0, dtype=int)
    pi_cont = pi.copy()
    pi_cont[idx, 1], pi_cont[idx, config.d] = pi[idx, config.d], pi[idx, 1]
    cats = _sample_categories(pi_cont, rng)
    Y = np.eye(config.d + 1)[cats]
    return X, Y, np.sort(idx)


@dataclass
class RelabelScheme:
    """Deterministic label permutation applied to a subset of rows.

    ``mapping[j]`` is the new (0-based) category for old category j.
    ``selection`` picks which rows change: a uniformly random subset of size
    m, the last m rows, or the first m rows whose current category equals
    ``category`` (for targeted misclassification).
    """

    mapping: tuple
    m: int
    selection: str = "random"
    category: int | None = None

    def __post_init__(self) -> None:
        if sorted(self.mapping) != list(range(len(self.mapping))):
            raise ValueError("mapping must be a permutation of 0..d")
        if self.m < 0:
            raise ValueError("m must be nonnegative")
        if self.selection not in ("random", "last_m", "by_category"):
            raise ValueError("selection must be random, last_m, or by_category")
        if self.selection == "by_category" and self.category is None:
            raise ValueError("by_category selection needs a category")


def relabel(response, scheme: RelabelScheme, rng: np.random.Generator | None = None):
    """Apply the scheme's permutation to the selected rows' labels.

    Returns (response, changed_row_indices); vectors are one-hot throughout.
    """
    Y = np.asarray(response, dtype=float)
    n, dp1 = Y.shape
    if len(scheme.mapping) != dp1:
        raise ValueError(
            f"mapping covers {len(scheme.mapping)} categories, response has {dp1}"
        )
    if scheme.m > n:
        raise ValueError(f"cannot relabel {scheme.m} of {n} rows")
    if scheme.selection == "random":
        if rng is None:
            raise ValueError("random selection needs an rng")
        rows = np.sort(rng.choice(n, size=scheme.m, replace=False))
    elif scheme.selection == "last_m":
        rows = np.arange(n - scheme.m, n)
    else:
        cats = Y.argmax(axis=1)
        pool = np.flatnonzero(cats == scheme.category)
        if pool.size < scheme.m:
            raise ValueError(
                f"only {pool.size} rows in category {scheme.category}, need {scheme.m}"
            )
        rows = pool[: scheme.m]
    out = Y.copy()
    perm = np.asarray(scheme.mapping)
    old = Y[rows].argmax(axis=1)
    out[rows] = np.eye(dp1)[perm[old]]
    return out, rows


# ---------------------------------------------------------------------------
# study drivers


@dataclass
class EstimatorStudyCell:
    alpha: float
    q: float
    n: int
    rmse: float
    mae: float
    replications_used: int
    failure_rate: float


def _fit_chain(X, Y, alphas, options):
    """Fit each alpha warm-starting from the previous one; None on failure."""
    results = {}
    warm = None
    for a in alphas:
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
            res = _estimation.fit(X, Y, alpha=a, options=opts)
        except _estimation.SeparationError:
            results[a] = None
            continue
        if res.converged:
            results[a] = res.beta_hat
            warm = res.beta_hat
        else:
            results[a] = None
    return results


def run_estimator_study(
    config: SimConfig, alphas, options: _estimation.FitOptions | None = None
) -> list:
    """RMSE of coefficients and MAE of probabilities per alpha.

    RMSE = sqrt(mean ||beta_hat - beta0||^2 / p) over replications; MAE is
    the mean absolute difference between fitted and true model probabilities
    over all rows, categories, and replications.  Failed replications are
    excluded per alpha and show up in the failure rate.
    """
    if options is None:
        options = _estimation.FitOptions()
    alphas = [float(a) for a in alphas]
    p = config.beta0.size
    sq_err = {a: [] for a in alphas}
    abs_err = {a: [] for a in alphas}
    for rep in range(config.replications):
        rng = substream(config.seed, rep)
        if config.q > 0.0:
            X, Y, _ = contaminate_swap(config, rng)
        else:
            X, Y = generate_dataset(config, rng)
        pi_true = _model.category_probabilities(X, config.beta0)
        fits = _fit_chain(X, Y, alphas, options)
        for a in alphas:
            beta = fits[a]
            if beta is None:
                continue
            sq_err[a].append(float(np.sum((beta - config.beta0) ** 2)))
            pi_hat = _model.category_probabilities(X, beta)
            abs_err[a].append(float(np.mean(np.abs(pi_hat - pi_true))))
    cells = []
    for a in alphas:
        used = len(sq_err[a])
        cells.append(
            EstimatorStudyCell(
                alpha=a,
                q=config.q,
                n=config.n,
                rmse=float(np.sqrt(np.mean(sq_err[a]) / p)) if used else float("nan"),
                mae=float(np.mean(abs_err[a])) if used else float("nan"),
                replications_used=used,
                failure_rate=1.0 - used / config.replications,
            )
        )
    return cells


@dataclass
class TestStudyCell:
    alpha: float
    q: float
    n: int
    rejection_rate: float
    replications_used: int
    failure_rate: float


def run_test_study(
    config: SimConfig,
    alphas,
    hypothesis: LinearHypothesis,
    tau: float = 0.05,
    options: _estimation.FitOptions | None = None,
) -> list:
    """Empirical rejection rate of the Wald-type test per alpha.

    With config.beta0 on the null this is the empirical level; with it off
    the null, the empirical power.
    """
    if options is None:
        options = _estimation.FitOptions()
    alphas = [float(a) for a in alphas]
    crit = chi_square_quantile(hypothesis.r, tau)
    rejections = {a: [] for a in alphas}
    for rep in range(config.replications):
        rng = substream(config.seed, rep)
        if config.q > 0.0:
            X, Y, _ = contaminate_swap(config, rng)
        else:
            X, Y = generate_dataset(config, rng)
        fits = _fit_chain(X, Y, alphas, options)
        for a in alphas:
            beta = fits[a]
            if beta is None:
                continue
            try:
                v = _covariance.sandwich_covariance(X, beta, a).v
                res = wald_test(beta, v, config.n, hypothesis)
            except (np.linalg.LinAlgError, ValueError):
                continue
            rejections[a].append(res.statistic > crit)
    cells = []
    for a in alphas:
        used = len(rejections[a])
        cells.append(
            TestStudyCell(
                alpha=a,
                q=config.q,
                n=config.n,
                rejection_rate=float(np.mean(rejections[a])) if used else float("nan"),
                replications_used=used,
                failure_rate=1.0 - used / config.replications,
            )
        )
    return cells


def misclassification_count(design, reference_response, beta) -> int:
    """Rows where the fitted category disagrees with the reference labels."""
    Y = np.asarray(reference_response, dtype=float)
    predicted = _estimation.classify(design, beta)
    return int(np.sum(predicted != Y.argmax(axis=1)))
