import csv
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import ball_box_projection, clamp_prefix_search, projected_gradient_max
from weighted_lp import kernels
from weighted_lp.errors import Overflow, ZeroVector
from weighted_lp.smoothing import (
    BIG_BOUND,
    GameRound,
    MoveSet,
    PotentialConfig,
    chasing_zero_move,
    play_chasing_zero,
    potential,
    potential_gradient,
    project_onto_ball_box,
)

vectors = st.lists(st.floats(-50, 50, allow_nan=False, allow_subnormal=False), min_size=1, max_size=12).map(np.array)


def test_potential_at_zero():
    assert potential(np.zeros(7), 0.3) == 14.0


@given(vectors, st.floats(0.01, 2.0))
def test_potential_symmetry_and_bounds(x, mu):
    assert math.isclose(potential(x, mu), potential(-x, mu), rel_tol=1e-14)
    top = math.exp(mu * float(np.max(np.abs(x))))
    assert top <= potential(x, mu) * (1 + 1e-12)
    assert potential(x, mu) <= 2 * x.size * top * (1 + 1e-12)


def test_potential_overflow_guard():
    with pytest.raises(Overflow):
        potential(np.array([800.0]), 1.0)
    with pytest.raises(Overflow):
        potential_gradient(np.array([-800.0]), 1.0)


@given(vectors, st.floats(0.01, 1.0))
def test_gradient_is_odd_with_matching_signs(x, mu):
    g = potential_gradient(x, mu)
    np.testing.assert_allclose(potential_gradient(-x, mu), -g, rtol=1e-14)
    assert np.all(np.sign(g) == np.sign(x))


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    x, mu, h = rng.uniform(-3, 3, 6), 0.7, 1e-7
    g = potential_gradient(x, mu)
    for i in range(6):
        e = np.zeros(6)
        e[i] = h
        fd = (potential(x + e, mu) - potential(x - e, mu)) / (2 * h)
        assert abs(fd - g[i]) <= 1e-5 * max(abs(g[i]), 1.0)
    np.testing.assert_array_equal(potential_gradient(np.zeros(3), mu), 0.0)


def test_projection_interior_case():
    x = project_onto_ball_box(np.array([3.0, 4.0]) / 5, np.ones(2))
    np.testing.assert_allclose(x, [0.6, 0.8], atol=1e-15)


def test_projection_single_active_coordinate():
    x = project_onto_ball_box(np.array([1.0, 0.0, 0.0]), np.array([0.5, 1.0, 1.0]))
    np.testing.assert_allclose(x, [0.5, 0.0, 0.0], atol=1e-15)


def test_projection_clamped_prefix():
    x = project_onto_ball_box(np.array([10.0, 1.0, 1.0]), np.array([0.1, 1.0, 1.0]))
    np.testing.assert_allclose(x, [0.1, math.sqrt(0.99 / 2), math.sqrt(0.99 / 2)], atol=1e-14)
    np.testing.assert_allclose(x, projected_gradient_max(np.array([10.0, 1.0, 1.0]), np.array([0.1, 1.0, 1.0])), atol=1e-8)


def test_projection_rejects_zero_and_bad_bounds():
    with pytest.raises(ZeroVector):
        project_onto_ball_box(np.zeros(3), np.ones(3))
    with pytest.raises(ValueError):
        project_onto_ball_box(np.ones(2), np.array([1.0, 0.0]))


def test_projection_with_inactive_bounds():
    a = np.array([1.0, -2.0, 2.0])
    x = project_onto_ball_box(a, np.full(3, np.inf))
    np.testing.assert_allclose(x, a / 3, atol=1e-15)
    assert BIG_BOUND < np.inf


def test_projection_tie_order_is_by_index():
    # equal keys: the result must not depend on anything but the inputs
    a = np.array([1.0, 1.0, 1.0, 1.0])
    l = np.full(4, 0.4)
    x = project_onto_ball_box(a, l, check=True)
    np.testing.assert_allclose(x, 0.4, atol=1e-15)


@given(
    st.integers(1, 12).flatmap(
        lambda m: st.tuples(
            st.lists(st.floats(-10, 10, allow_nan=False), min_size=m, max_size=m),
            st.lists(st.floats(1e-3, 2.0), min_size=m, max_size=m),
        )
    )
)
def test_projection_matches_oracles(data):
    a, l = np.array(data[0]), np.array(data[1])
    # projected ascent cannot resolve directions with vanishing gradient,
    # so the oracle comparison uses entries that are zero or not tiny
    a[np.abs(a) < 1e-3] = 0.0
    if np.linalg.norm(a) == 0:
        return
    x = project_onto_ball_box(a, l, check=True)
    assert np.linalg.norm(x) <= 1 + 1e-12
    assert np.all(np.abs(x) <= l * (1 + 1e-12))
    an = a / np.linalg.norm(a)
    assert an @ x >= an @ clamp_prefix_search(a, l) - 1e-10
    np.testing.assert_allclose(x, projected_gradient_max(a, l), atol=1e-6)


@given(st.integers(0, 10_000), st.integers(1, 20))
def test_kernel_maximizer_matches_reference(seed, m):
    rng = np.random.default_rng(seed)
    a, l = rng.standard_normal(m), rng.uniform(0.01, 1.0, m)
    np.testing.assert_allclose(kernels.ball_box(a, l), project_onto_ball_box(a, l), atol=1e-12)


@given(st.integers(0, 10_000), st.integers(1, 20), st.floats(0.1, 5.0))
def test_kernel_projection_matches_oracle(seed, m, spread):
    rng = np.random.default_rng(seed)
    v, l = spread * rng.standard_normal(m), rng.uniform(0.01, 1.0, m)
    np.testing.assert_allclose(kernels.project_ball_box(v, l), ball_box_projection(v, l), atol=1e-12)


def test_move_at_zero_is_zero():
    moves = MoveSet(1.0, 1.0, np.ones(4))
    np.testing.assert_array_equal(chasing_zero_move(np.zeros(4), moves, PotentialConfig(0.1, 1.0, 0.1)), 0.0)


def test_move_one_dimensional():
    moves = MoveSet(weight_norm_bound=1.0, inf_norm_bound=2.0, w=np.ones(1))
    move = chasing_zero_move(np.array([5.0]), moves, PotentialConfig(mu=0.1, R=1.0, eps_game=0.0))
    np.testing.assert_allclose(move, [-1.0], atol=1e-15)


def test_move_beats_random_members_of_move_set():
    rng = np.random.default_rng(1)
    m = 8
    w = rng.uniform(0.2, 2.0, m)
    moves = MoveSet(0.7, 0.3, w)
    cfg = PotentialConfig(mu=0.4, R=1.0, eps_game=0.1)
    z = rng.uniform(-3, 3, m)
    grad = potential_gradient(z, cfg.mu)
    move = chasing_zero_move(z, moves, cfg)
    assert MoveSet(0.7 * 1.1, 0.3 * 1.1, w).contains(move)
    best = grad @ move
    for _ in range(1000):
        u = rng.standard_normal(m)
        u *= rng.uniform() * min(0.7 / math.sqrt(np.sum(w * u * u)), 0.3 / np.max(np.abs(u)))
        assert moves.contains(u)
        assert best <= (1 + cfg.eps_game) * (grad @ u) + 1e-12


def test_move_set_validation():
    with pytest.raises(ValueError):
        MoveSet(0.0, 1.0, np.ones(2))
    with pytest.raises(ValueError):
        PotentialConfig(mu=1.0, R=1.0, eps_game=0.3)
    cfg = PotentialConfig.for_radius(2.0, 0.1)
    assert math.isclose(cfg.mu, 0.1 / 24)


def test_idle_adversary_never_raises_potential(tmp_path):
    m = 5
    cfg = PotentialConfig.for_radius(1.0, 0.1)
    moves = MoveSet(1.0, 0.5, np.ones(m))

    def idle(k, x):
        return GameRound(moves, np.zeros(m), np.zeros(m))

    traj = play_chasing_zero(idle, 200, cfg, np.linspace(-20, 20, m))
    assert not traj.overflowed
    phi, far = np.array(traj.potentials), np.array(traj.max_abs)
    # the pull is a full move each round, so it decreases the potential
    # until the point is within two moves of zero and then jitters there
    step = 2 * (1 + cfg.eps_game) * moves.inf_norm_bound
    assert np.all(np.diff(phi)[far[:-1] > step] <= 1e-12)
    assert np.all(phi <= phi[0] + 1e-12)
    assert far[-1] <= step
    path = tmp_path / "game.csv"
    traj.write_csv(str(path))
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["round", "potential", "max_abs"] and len(rows) == 202
