"""Wald-type tests of linear hypotheses, power approximation, sample size.

A linear hypothesis L beta = l (L full row rank r) is tested with

    W = n (L beta_hat - l)^T [L V L^T]^-1 (L beta_hat - l),

asymptotically chi-square with r degrees of freedom under the null, where V
is the sandwich covariance at the fitted coefficients.  The approximate
power at an alternative beta1 and the minimal sample size for a target
power both come from a first-order normal approximation of W around beta1,
with the covariance frozen at beta1.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special

__all__ = [
    "LinearHypothesis",
    "WaldResult",
    "chi_square_sf",
    "chi_square_quantile",
    "normal_cdf",
    "normal_quantile",
    "constraint_quadratic",
    "wald_test",
    "approximate_power",
    "required_sample_size",
]

RANK_TOL = 1e-10


@dataclass
class LinearHypothesis:
    """H0: L beta = l with L of full row rank."""

    L: np.ndarray
    l: np.ndarray

    def __post_init__(self) -> None:
        self.L = np.atleast_2d(np.asarray(self.L, dtype=float))
        self.l = np.atleast_1d(np.asarray(self.l, dtype=float)).ravel()
        r, p = self.L.shape
        if r > p:
            raise ValueError(f"hypothesis has more rows ({r}) than coefficients ({p})")
        if self.l.size != r:
            raise ValueError(f"L has {r} rows but l has length {self.l.size}")
        sv = np.linalg.svd(self.L, compute_uv=False)
        if sv.size == 0 or sv[-1] <= RANK_TOL:
            raise ValueError("hypothesis matrix is rank deficient")

    @property
    def r(self) -> int:
        return self.L.shape[0]


@dataclass
class WaldResult:
    statistic: float
    df: int
    p_value: float
    reject_at: dict = field(default_factory=dict)


def chi_square_sf(w, df: int) -> float:
    """Upper-tail chi-square probability via the regularized incomplete gamma."""
    if df < 1:
        raise ValueError("df must be >= 1")
    w = float(w)
    if w <= 0.0:
        return 1.0
    return float(special.gammaincc(df / 2.0, w / 2.0))


def chi_square_quantile(df: int, tau: float) -> float:
    """Upper-tail quantile: chi_square_sf(quantile, df) == tau."""
    if df < 1:
        raise ValueError("df must be >= 1")
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must be in (0, 1)")
    return float(2.0 * special.gammainccinv(df / 2.0, tau))


def normal_cdf(z) -> float:
    return float(special.ndtr(z))


def normal_quantile(q) -> float:
    if not 0.0 < q < 1.0:
        raise ValueError("q must be in (0, 1)")
    return float(special.ndtri(q))


def constraint_quadratic(beta, hypothesis: LinearHypothesis, v_matrix) -> float:
    """(L beta - l)^T (L V L^T)^-1 (L beta - l), the scaled constraint gap."""
    L, l = hypothesis.L, hypothesis.l
    resid = L @ np.asarray(beta, dtype=float).ravel() - l
    middle = L @ np.asarray(v_matrix, dtype=float) @ L.T
    try:
        sol = np.linalg.solve(middle, resid)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            "L V L^T is singular; the hypothesis directions carry no variance"
        ) from exc
    return float(resid @ sol)


def wald_test(
    beta_hat,
    v_matrix,
    n: int,
    hypothesis: LinearHypothesis,
    levels=(0.01, 0.05, 0.10),
) -> WaldResult:
    """Wald-type test of L beta = l from a fitted coefficient vector.

    ``v_matrix`` is the sandwich covariance of sqrt(n)(beta_hat - beta), so
    the statistic scales the quadratic form by n.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    stat = float(n) * constraint_quadratic(beta_hat, hypothesis, v_matrix)
    r = hypothesis.r
    p_value = chi_square_sf(stat, r)
    reject = {float(tau): stat > chi_square_quantile(r, tau) for tau in levels}
    return WaldResult(statistic=stat, df=r, p_value=p_value, reject_at=reject)


def _sigma_squared(beta1, hypothesis: LinearHypothesis, v_matrix) -> float:
    """Variance of the linearized constraint gap at beta1 (V frozen there)."""
    L, l = hypothesis.L, hypothesis.l
    V = np.asarray(v_matrix, dtype=float)
    resid = L @ np.asarray(beta1, dtype=float).ravel() - l
    middle = L @ V @ L.T
    grad = 2.0 * L.T @ np.linalg.solve(middle, resid)
    return float(grad @ V @ grad)


def approximate_power(beta1, hypothesis: LinearHypothesis, v_matrix, n: int, tau: float = 0.05) -> float:
    """First-order approximate power of the Wald test at the alternative beta1.

    ``v_matrix`` must be the sandwich covariance evaluated at beta1 (for the
    design of interest).  Requires beta1 strictly off the null; on the
    boundary the linearization has zero variance and no approximation exists.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    ell = constraint_quadratic(beta1, hypothesis, v_matrix)
    sigma2 = _sigma_squared(beta1, hypothesis, v_matrix)
    if sigma2 <= 0.0:
        raise ValueError(
            "linearized variance is zero; beta1 lies on the hypothesis boundary"
        )
    crit = chi_square_quantile(hypothesis.r, tau)
    z = (crit / np.sqrt(n) - np.sqrt(n) * ell) / np.sqrt(sigma2)
    return 1.0 - normal_cdf(z)


def required_sample_size(
    beta1,
    hypothesis: LinearHypothesis,
    v_matrix,
    power_target: float,
    tau: float = 0.05,
) -> int:
    """Smallest n at which the approximate power reaches ``power_target``.

    Closed-form inversion of the power approximation; integer part plus one.
    """
    if not 0.0 < power_target < 1.0:
        raise ValueError("power_target must be in (0, 1)")
    ell = constraint_quadratic(beta1, hypothesis, v_matrix)
    if ell <= 0.0:
        raise ValueError(
            "beta1 satisfies the null; no finite sample size attains the target power"
        )
    sigma2 = _sigma_squared(beta1, hypothesis, v_matrix)
    a1 = sigma2 * normal_quantile(1.0 - power_target) ** 2
    a2 = 2.0 * ell * chi_square_quantile(hypothesis.r, tau)
    n_real = (a1 + a2 + np.sqrt(a1 * (a1 + 2.0 * a2))) / (2.0 * ell * ell)
    return int(1 + np.floor(n_real))
