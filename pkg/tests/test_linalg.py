import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import dense_projection, random_full_rank
from weighted_lp.errors import NonFinite, RankDeficient
from weighted_lp.linalg import (
    NormalFactor,
    SolveTolerance,
    approx_leverage_scores,
    check_constraint_matrix,
    exact_leverage_scores,
    jl_dimension,
    slack_sensitivity,
    solve_normal_equations,
    start_counting,
)


def test_solve_identity_system():
    y = solve_normal_equations(np.eye(2), np.ones(2), np.array([3.0, -5.0]))
    np.testing.assert_allclose(y, [3.0, -5.0], atol=1e-15)


def test_solve_diagonal_system():
    y = solve_normal_equations(np.eye(2), np.array([2.0, 4.0]), np.array([2.0, 4.0]))
    np.testing.assert_allclose(y, [1.0, 1.0], atol=1e-15)


def test_solve_small_overdetermined_system():
    A = np.array([[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    y = solve_normal_equations(A, np.ones(3), np.ones(2))
    np.testing.assert_allclose(y, [1 / 3, 1 / 3], atol=1e-15)


@given(st.integers(0, 10_000), st.integers(1, 6), st.integers(0, 20))
def test_solve_roundtrip(seed, n, extra):
    rng = np.random.default_rng(seed)
    A = random_full_rank(rng, n + extra, n)
    d = rng.uniform(0.1, 10.0, n + extra)
    rhs = rng.standard_normal(n)
    y = solve_normal_equations(A, d, rhs)
    back = A.T @ (d[:, None] * A) @ y
    assert np.linalg.norm(back - rhs) <= 1e-10 * np.linalg.norm(rhs) * np.linalg.cond(A.T @ (d[:, None] * A))


def test_rank_deficient_matrix_is_rejected():
    A = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
    with pytest.raises(RankDeficient):
        solve_normal_equations(A, np.ones(3), np.ones(2))


def test_non_finite_input_is_rejected():
    with pytest.raises(NonFinite):
        solve_normal_equations(np.eye(2), np.ones(2), np.array([np.nan, 1.0]))
    with pytest.raises(NonFinite):
        NormalFactor(np.eye(2), np.array([1.0, np.inf]))


def test_solve_tolerance_bounds():
    with pytest.raises(ValueError):
        SolveTolerance(relative_accuracy=0.0)
    with pytest.raises(ValueError):
        SolveTolerance(relative_accuracy=1.0)


def test_constraint_matrix_checks():
    with pytest.raises(ValueError):
        check_constraint_matrix(np.zeros((0, 2)))
    with pytest.raises(ValueError):
        check_constraint_matrix(np.ones((1, 2)))
    with pytest.raises(ValueError):
        check_constraint_matrix(np.array([[1.0, 0.0], [0.0, 0.0], [1.0, 0.0]]))
    with pytest.raises(ValueError):
        check_constraint_matrix(np.array([[1.0, 0.0], [2.0, 0.0]]))


@pytest.mark.parametrize(
    "A, x, expected",
    [
        (np.eye(2), np.ones(2), [1.0, 1.0]),
        (np.ones((3, 1)), np.ones(3), [1 / 3, 1 / 3, 1 / 3]),
        (np.array([[1.0], [2.0], [3.0]]), np.ones(3), [1 / 14, 4 / 14, 9 / 14]),
    ],
)
def test_exact_leverage_scores_closed_forms(A, x, expected):
    np.testing.assert_allclose(exact_leverage_scores(A, x), expected, atol=1e-15)


def test_leverage_scores_frozen_instance():
    # diagonal of the dense projection, computed with an explicit inverse
    A = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0], [2.0, 1.0]])
    x = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    frozen = [0.04501608, 0.18006431, 0.23151125, 0.77170418, 0.77170418]
    np.testing.assert_allclose(exact_leverage_scores(A, x), frozen, atol=1e-8)


@given(st.integers(0, 10_000), st.integers(1, 5), st.integers(0, 15))
def test_projection_properties(seed, n, extra):
    rng = np.random.default_rng(seed)
    m = n + extra
    A = random_full_rank(rng, m, n)
    x = rng.uniform(0.05, 5.0, m)
    factor = NormalFactor(A, x)
    sigma = factor.leverage_scores()
    assert np.all(sigma >= -1e-12) and np.all(sigma <= 1 + 1e-12)
    assert abs(sigma.sum() - n) <= 1e-10 * n
    P = factor.projection()
    np.testing.assert_allclose(P, dense_projection(A, x), atol=1e-9)
    np.testing.assert_allclose(P @ P, P, atol=1e-10)


def test_graded_rows_keep_small_leverage_accurate():
    # rows spanning 16 orders of magnitude; the normal equations would lose the small ones
    A = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    d = np.array([1e16, 1e16, 1.0])
    sigma = exact_leverage_scores(A, d)
    # closed form for the light row: a M^{-1} a^T with M = diag(1e16 + 1) + offdiag 1
    M = np.array([[1e16 + 1, 1.0], [1.0, 1e16 + 1]])
    light = np.array([1.0, 1.0]) @ np.linalg.solve(M, np.array([1.0, 1.0]))
    assert math.isclose(sigma[2], light, rel_tol=1e-10)


def test_approx_leverage_scores_bands():
    rng = np.random.default_rng(3)
    est = approx_leverage_scores(np.eye(2), np.ones(2), 0.5, rng)
    assert np.all((est >= 0.5) & (est <= 1.5))
    est = approx_leverage_scores(np.ones((3, 1)), np.ones(3), 0.3, rng)
    assert np.all((est >= 0.7 / 3) & (est <= 1.3 / 3))


def test_approx_leverage_scores_converge_for_small_eps():
    rng = np.random.default_rng(4)
    A = random_full_rank(rng, 12, 3)
    x = rng.uniform(0.5, 2.0, 12)
    exact = exact_leverage_scores(A, x)
    est = np.mean([approx_leverage_scores(A, x, 0.05, rng) for _ in range(5)], axis=0)
    np.testing.assert_allclose(est, exact, rtol=0.03, atol=1e-3)


def test_jl_dimension_uses_natural_log():
    assert jl_dimension(40, 0.2) == math.ceil(24 * math.log(40) / 0.04)
    with pytest.raises(ValueError):
        jl_dimension(10, 1.5)


@pytest.mark.parametrize("w, expected", [(np.ones(2), 1.0), (np.full(2, 4.0), 0.5)])
def test_slack_sensitivity_identity(w, expected):
    assert math.isclose(slack_sensitivity(np.eye(2), np.ones(2), w), expected, rel_tol=1e-14)


def test_slack_sensitivity_sketched_close_to_exact():
    rng = np.random.default_rng(5)
    A = random_full_rank(rng, 20, 3)
    s, w = rng.uniform(0.5, 2, 20), rng.uniform(0.2, 1, 20)
    exact = slack_sensitivity(A, s, w)
    approx = slack_sensitivity(A, s, w, sketch_eps=0.1, rng=rng)
    assert abs(approx - exact) <= 0.1 * exact


def test_factorizations_are_counted():
    box = start_counting()
    NormalFactor(np.eye(3), np.ones(3))
    NormalFactor(np.eye(3), np.ones(3))
    assert box[0] == 2
