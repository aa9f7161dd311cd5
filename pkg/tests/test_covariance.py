import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from rpmlogit import covariance, model
from rpmlogit.covariance import (
    SingularCurvatureError,
    curvature_matrix,
    j_matrix,
    relative_efficiency,
    sandwich_covariance,
    score_variance_matrix,
    xi_vector,
)

from oracles import enum_curvature, enum_score_variance, irls_fit


def random_instance(seed, n=6, k=2, d=2, scale=0.8):
    rng = np.random.default_rng(seed)
    X = np.column_stack([np.ones(n), rng.normal(size=(n, k))])
    beta = rng.normal(size=d * (k + 1), scale=scale)
    return X, beta


def test_xi_vector_zero_at_alpha_zero():
    X, beta = random_instance(1)
    assert_allclose(xi_vector(X[0], beta, 0.0), np.zeros(6), atol=1e-14)


def test_xi_vector_zero_at_uniform_probabilities():
    assert_allclose(xi_vector([1.0, 0.5, -0.5], np.zeros(6), 1.0), np.zeros(6), atol=1e-14)


def test_xi_vector_termwise_evaluation():
    # independent per-component evaluation of Delta* pi^alpha kron x
    x = np.array([1.0, 2.0])
    beta = np.array([0.3, -0.2, -0.5, 0.4])
    a = 1.0
    pi = model.category_probabilities(x.reshape(1, -1), beta)[0]
    expect = []
    for j in range(2):
        acc = 0.0
        for m in range(3):
            dstar_jm = pi[j] * ((1.0 if j == m else 0.0) - pi[m])
            acc += dstar_jm * pi[m] ** a
        expect.append(acc)
    expected = np.concatenate([e * x for e in expect])
    assert_allclose(xi_vector(x, beta, a), expected, rtol=1e-12)


def test_j_matrix_uniform_alpha_one_closed_form():
    J = j_matrix([1.0], np.zeros(2), 1.0)
    assert_allclose(J, [[2 / 27, -1 / 27], [-1 / 27, 2 / 27]], rtol=1e-12)


def test_j_matrix_alpha_zero_is_fisher_block():
    X, beta = random_instance(2)
    J = j_matrix(X[0], beta, 0.0)
    pi = model.category_probabilities(X[:1], beta)[0]
    head = pi[:2]
    fisher = np.kron(np.diag(head) - np.outer(head, head), np.outer(X[0], X[0]))
    assert_allclose(J, fisher, atol=1e-12)


def test_j_matrix_symmetric_psd():
    X, beta = random_instance(3)
    for a in (0.0, 0.4, 1.3):
        J = j_matrix(X[1], beta, a)
        assert_allclose(J, J.T, atol=1e-12)
        assert np.min(np.linalg.eigvalsh(J)) >= -1e-12


def test_curvature_alpha_zero_is_mean_fisher_information():
    X, beta = random_instance(4, n=8)
    phi = curvature_matrix(X, beta, 0.0)
    pi = model.category_probabilities(X, beta)
    total = np.zeros((6, 6))
    for i in range(8):
        head = pi[i, :2]
        block = np.diag(head) - np.outer(head, head)
        total += np.kron(block, np.outer(X[i], X[i]))
    assert_allclose(phi, total / 8, rtol=1e-12)


def test_curvature_single_uniform_row_closed_form():
    # Gamma = 1/3 so the leading factor is (1/3)^(-1/2) = sqrt(3)
    phi = curvature_matrix([[1.0]], np.zeros(2), 1.0)
    expected = math.sqrt(3.0) * np.array([[2 / 27, -1 / 27], [-1 / 27, 2 / 27]])
    assert_allclose(phi, expected, rtol=1e-12)


@pytest.mark.parametrize("alpha", [0.0, 0.3, 0.7])
def test_curvature_matches_enumeration_oracle(alpha):
    X, beta = random_instance(5, n=4)
    phi = curvature_matrix(X, beta, alpha)
    oracle = enum_curvature(X, beta, alpha)
    err = np.max(np.abs(phi - oracle)) / np.max(np.abs(oracle))
    assert err < 1e-6


@pytest.mark.parametrize("alpha", [0.0, 0.3, 0.7])
def test_score_variance_matches_enumeration_oracle(alpha):
    X, beta = random_instance(6, n=4)
    omega = score_variance_matrix(X, beta, alpha)
    oracle = enum_score_variance(X, beta, alpha)
    err = np.max(np.abs(omega - oracle)) / np.max(np.abs(oracle))
    assert err < 1e-6


def test_score_variance_alpha_zero_equals_curvature():
    X, beta = random_instance(7, n=5)
    assert_allclose(
        score_variance_matrix(X, beta, 0.0), curvature_matrix(X, beta, 0.0), rtol=1e-12
    )


def test_score_variance_single_uniform_row_closed_form():
    # at uniform probabilities both xi terms vanish and Gamma = 1/3,
    # leaving Gamma^(-1) * J(2alpha) with alpha = 1
    omega = score_variance_matrix([[1.0]], np.zeros(2), 1.0)
    inner = j_matrix([1.0], np.zeros(2), 2.0)
    assert_allclose(omega, 3.0 * inner, rtol=1e-12)


def test_score_variance_psd_on_random_instances():
    for seed in range(3):
        X, beta = random_instance(30 + seed, n=7)
        for a in (0.0, 0.4, 0.9):
            omega = score_variance_matrix(X, beta, a)
            assert_allclose(omega, omega.T, atol=1e-10)
            assert np.min(np.linalg.eigvalsh(omega)) >= -1e-10


def test_sandwich_alpha_zero_is_inverse_information():
    X, beta = random_instance(8, n=9)
    sw = sandwich_covariance(X, beta, 0.0)
    assert_allclose(sw.v @ sw.phi, np.eye(6), atol=1e-8)


def test_sandwich_v_symmetric():
    X, beta = random_instance(9, n=9)
    sw = sandwich_covariance(X, beta, 0.6)
    assert_allclose(sw.v, sw.v.T, atol=1e-10)


def test_sandwich_matches_irls_covariance_at_mle():
    rng = np.random.default_rng(10)
    n = 80
    X = np.column_stack([np.ones(n), rng.normal(size=(n, 2))])
    beta0 = np.array([0.2, -0.4, 0.3, -0.1, 0.5, -0.6])
    pi = model.category_probabilities(X, beta0)
    idx = (rng.random(n)[:, None] >= pi.cumsum(axis=1)).sum(axis=1)
    Y = np.zeros((n, 3))
    Y[np.arange(n), idx] = 1.0
    oracle_beta, oracle_cov = irls_fit(X, Y)
    sw = sandwich_covariance(X, oracle_beta, 0.0)
    assert np.max(np.abs(sw.v - oracle_cov)) < 1e-6


def test_sandwich_row_order_invariance():
    X, beta = random_instance(11, n=10)
    perm = np.random.default_rng(0).permutation(10)
    sw1 = sandwich_covariance(X, beta, 0.5)
    sw2 = sandwich_covariance(X[perm], beta, 0.5)
    assert_allclose(sw1.v, sw2.v, rtol=1e-10)


def test_singular_curvature_raises_with_condition_number():
    # duplicate predictor column makes the information singular
    X = np.column_stack([np.ones(6), np.arange(6.0), np.arange(6.0)])
    beta = np.zeros(6)
    with pytest.raises(SingularCurvatureError) as exc:
        sandwich_covariance(X, beta, 0.0)
    assert exc.value.condition_number > 1e12


def test_relative_efficiency_is_one_at_alpha_zero():
    X, beta = random_instance(12, n=15)
    assert_allclose(relative_efficiency(X, beta, 0.0), np.ones(6), rtol=1e-12)


def test_relative_efficiency_at_most_one_on_model_designs():
    rng = np.random.default_rng(13)
    beta0 = np.array([0.0, -0.9, 0.1, 0.6, -1.2, 0.8])
    for _ in range(3):
        X = np.column_stack([np.ones(150), rng.normal(size=(150, 2))])
        for a in (0.2, 0.5, 0.8):
            are = relative_efficiency(X, beta0, a)
            assert np.all(are <= 1.0 + 0.02)
