"""Soft-max potential, the ball-and-box linear maximizer, and the chasing game.

The game keeps a vector near zero while an adversary perturbs it and the
player only sees a noisy copy.  The player answers each round with the
move in a symmetric convex set that most decreases a soft-max potential.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import Overflow, ZeroVector

EXP_LIMIT = 700.0
# stand-in for an inactive box bound
BIG_BOUND = np.finfo(float).max ** 0.25


@dataclass(frozen=True)
class PotentialConfig:
    mu: float
    R: float
    eps_game: float

    def __post_init__(self):
        if self.mu <= 0 or self.R <= 0:
            raise ValueError("mu and R must be positive")
        if not 0.0 <= self.eps_game < 0.2:
            raise ValueError("eps_game must lie in [0, 1/5)")

    @classmethod
    def for_radius(cls, R: float, eps_game: float) -> "PotentialConfig":
        return cls(mu=eps_game / (12.0 * R), R=R, eps_game=eps_game)


@dataclass(frozen=True)
class MoveSet:
    """``{y : ||y||_W <= weight_norm_bound and ||y||_inf <= inf_norm_bound}``."""

    weight_norm_bound: float
    inf_norm_bound: float
    w: np.ndarray

    def __post_init__(self):
        if self.weight_norm_bound <= 0 or self.inf_norm_bound <= 0:
            raise ValueError("move set radii must be positive")

    def contains(self, y: np.ndarray, slack: float = 1e-12) -> bool:
        wn = math.sqrt(float(np.sum(self.w * y * y)))
        return (
            wn <= self.weight_norm_bound * (1 + slack)
            and float(np.max(np.abs(y), initial=0.0)) <= self.inf_norm_bound * (1 + slack)
        )


def _guard(x: np.ndarray, mu: float) -> np.ndarray:
    ax = mu * np.abs(np.asarray(x, dtype=float))
    if ax.size and float(np.max(ax)) > EXP_LIMIT:
        raise Overflow("potential argument out of range")
    return ax


def potential(x: np.ndarray, mu: float) -> float:
    ax = _guard(x, mu)
    return float(np.sum(np.exp(ax) + np.exp(-ax)))


def potential_gradient(x: np.ndarray, mu: float) -> np.ndarray:
    ax = _guard(x, mu)
    return mu * np.sign(x) * 2.0 * np.sinh(ax)


def project_onto_ball_box(a: np.ndarray, l: np.ndarray, check: bool = False) -> np.ndarray:
    """Maximize ``<a, x>`` over the unit Euclidean ball intersected with ``|x_i| <= l_i``.

    Coordinates are sorted by ``|a_i| / l_i``; the first ``k`` of them are
    clamped to the box and the rest are scaled to fill the remaining ball
    mass, with ``k`` the first prefix length whose scaled suffix fits.
    """
    a = np.asarray(a, dtype=float)
    l = np.minimum(np.asarray(l, dtype=float), BIG_BOUND)
    if np.any(l <= 0):
        raise ValueError("box bounds must be positive")
    norm = float(np.linalg.norm(a))
    if norm == 0.0:
        raise ZeroVector("cannot align with the zero vector")
    a = a / norm
    m = a.size
    # stable sort on the negated key: ties keep ascending index order
    order = np.argsort(-(np.abs(a) / l), kind="stable")
    a_s, l_s = a[order], l[order]
    l_left = 1.0 - np.concatenate(([0.0], np.cumsum(l_s**2)))
    # ball mass of each suffix, summed from the tail: 1 - prefix sum would
    # cancel when a few coordinates carry almost all of it
    a_left = np.concatenate((np.cumsum((a_s**2)[::-1])[::-1], [0.0]))

    k = m
    for i in range(m):
        if l_left[i] <= 0.0:
            # clamping this prefix already fills the ball; cannot happen
            # before the scan stops unless the box is outside the ball
            k = i
            break
        if a_left[i] <= 0.0:
            k = i
            break
        ratio = l_left[i] / a_left[i]
        if ratio * a_s[i] ** 2 <= l_s[i] ** 2:
            k = i
            break
    if check and k > 0:
        ratios = [l_left[j] / a_left[j] for j in range(k + 1) if a_left[j] > 0]
        assert all(np.diff(ratios) >= -1e-12), "prefix ratio not monotone"

    x_s = np.empty(m)
    x_s[:k] = np.sign(a_s[:k]) * l_s[:k]
    if k < m:
        scale = math.sqrt(max(l_left[k], 0.0) / a_left[k]) if a_left[k] > 0 else 0.0
        x_s[k:] = scale * a_s[k:]
    x = np.empty(m)
    x[order] = x_s
    return x


def chasing_zero_move(observed: np.ndarray, moveset: MoveSet, cfg: PotentialConfig) -> np.ndarray:
    """Inflated minimizer over the move set of the potential gradient at ``observed``."""
    grad = potential_gradient(observed, cfg.mu)
    if not np.any(grad):
        return np.zeros_like(grad)
    root_w = np.sqrt(moveset.w)
    b, c = moveset.weight_norm_bound, moveset.inf_norm_bound
    # y in U  <=>  x = y * sqrt(w) / b lies in the unit ball with box c*sqrt(w)/b
    x = project_onto_ball_box(grad / root_w, c * root_w / b)
    return -(1.0 + cfg.eps_game) * x * b / root_w


@dataclass
class GameRound:
    moveset: MoveSet
    hidden_move: np.ndarray
    observation_error: np.ndarray


@dataclass
class GameTrajectory:
    potentials: list[float] = field(default_factory=list)
    max_abs: list[float] = field(default_factory=list)
    final: np.ndarray | None = None
    overflowed: bool = False

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["round", "potential", "max_abs"])
            for k, (p, x) in enumerate(zip(self.potentials, self.max_abs)):
                out.writerow([k, repr(p), repr(x)])


Adversary = Callable[[int, np.ndarray], GameRound]


def play_chasing_zero(
    adversary: Adversary,
    rounds: int,
    cfg: PotentialConfig,
    x0: np.ndarray,
) -> GameTrajectory:
    """Run the game for ``rounds`` rounds; round ``k`` asks ``adversary(k, x)``.

    Each round the adversary picks a move set, a hidden move inside it and
    an observation error with max norm at most ``cfg.R``.  The player sees
    ``x + u + error`` and answers with ``chasing_zero_move``.
    """
    x = np.asarray(x0, dtype=float).copy()
    traj = GameTrajectory()
    try:
        traj.potentials.append(potential(x, cfg.mu))
        traj.max_abs.append(float(np.max(np.abs(x))))
        for k in range(rounds):
            rnd = adversary(k, x.copy())
            y = x + rnd.hidden_move
            z = y + rnd.observation_error
            x = y + chasing_zero_move(z, rnd.moveset, cfg)
            traj.potentials.append(potential(x, cfg.mu))
            traj.max_abs.append(float(np.max(np.abs(x))))
    except Overflow:
        traj.overflowed = True
    traj.final = x
    return traj
