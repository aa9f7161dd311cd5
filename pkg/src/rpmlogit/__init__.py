"""Robust polytomous logistic regression via minimum Renyi pseudodistance.

The pieces, roughly in order of use:

- :mod:`rpmlogit.model` -- category probabilities and the per-row objective.
- :mod:`rpmlogit.estimation` / :class:`RenyiLogit` -- fitting, functional or
  sklearn style.
- :mod:`rpmlogit.covariance` -- curvature, score variance, and the sandwich
  covariance behind standard errors.
- :mod:`rpmlogit.hypothesis` -- Wald-type tests, power, and sample size.
- :mod:`rpmlogit.influence` -- influence functions and the bounded-score
  diagnostics for outlying predictors or responses.
- :mod:`rpmlogit.tuning` -- data-driven choice of the robustness parameter.
- :mod:`rpmlogit.simulate` -- Monte Carlo studies of estimators and tests.
- :mod:`rpmlogit.io` -- CSV ingestion and report formatting for the CLI.
"""

from .covariance import (
    SandwichMatrices,
    SingularCurvatureError,
    curvature_matrix,
    relative_efficiency,
    sandwich_covariance,
    score_variance_matrix,
)
from .estimation import (
    FitOptions,
    FitResult,
    NonConvergenceError,
    SeparationError,
    classify,
    fit,
)
from .estimator import RenyiLogit
from .hypothesis import (
    LinearHypothesis,
    WaldResult,
    approximate_power,
    required_sample_size,
    wald_test,
)
from .influence import (
    ContaminationPoint,
    influence_all,
    influence_single,
    predictor_ray_scan,
    response_score_bound,
    wald_influence,
)
from .io import DatasetSpec, LoadedData, load_csv, load_diabetes
from .model import category_probabilities, mean_score, objective, renyi_divergence
from .simulate import (
    SimConfig,
    generate_dataset,
    run_estimator_study,
    run_test_study,
)
from .tuning import TuningGrid, TuningResult, select_alpha

__version__ = "1.0.0"

__all__ = [
    "RenyiLogit",
    "fit",
    "classify",
    "FitOptions",
    "FitResult",
    "SeparationError",
    "NonConvergenceError",
    "category_probabilities",
    "renyi_divergence",
    "objective",
    "mean_score",
    "curvature_matrix",
    "score_variance_matrix",
    "sandwich_covariance",
    "relative_efficiency",
    "SandwichMatrices",
    "SingularCurvatureError",
    "LinearHypothesis",
    "WaldResult",
    "wald_test",
    "approximate_power",
    "required_sample_size",
    "ContaminationPoint",
    "influence_single",
    "influence_all",
    "wald_influence",
    "predictor_ray_scan",
    "response_score_bound",
    "TuningGrid",
    "TuningResult",
    "select_alpha",
    "SimConfig",
    "generate_dataset",
    "run_estimator_study",
    "run_test_study",
    "DatasetSpec",
    "LoadedData",
    "load_csv",
    "load_diabetes",
    "__version__",
]
