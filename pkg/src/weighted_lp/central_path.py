"""Weighted log-barrier path following.

The barrier at path parameter ``t`` is ``t c^T x - sum_i w_i log s_i`` with
slacks ``s = A x - b``.  Iterates carry both the point and the weights; the
weights are steered toward the weight function while the point is steered
toward the minimizer of the barrier.
"""

from __future__ import annotations

import copy
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .config import CenteringConfig, PathConfig, WeightConfig
from .errors import (
    IterationLimit,
    NoConvergence,
    NonFinite,
    NonInterior,
    Overflow,
    RankDeficient,
    RollbackLoop,
    StepTooLarge,
)
from . import kernels
from .linalg import NormalFactor
from .smoothing import MoveSet, PotentialConfig, chasing_zero_move, potential, potential_gradient
from .weights import compute_weight, newton_weight

log = logging.getLogger(__name__)

# accuracy of the exact weight behind an audit; the tracking error it feeds
# is compared with budgets of order 1e-2 or more
AUDIT_WEIGHT_STEP = 1e-7
AUDIT_WEIGHT_TOL = 1e-7


@dataclass(frozen=True)
class Polytope:
    """``{x : A x >= b}``."""

    A: np.ndarray
    b: np.ndarray

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def slacks(self, x: np.ndarray) -> np.ndarray:
        return self.A @ x - self.b


@dataclass
class WeightedIterate:
    x: np.ndarray
    w: np.ndarray
    t: float
    s: np.ndarray

    @classmethod
    def at(cls, poly: Polytope, x: np.ndarray, w: np.ndarray, t: float) -> "WeightedIterate":
        s = poly.slacks(x)
        if not np.all(np.isfinite(s)):
            raise NonFinite("slacks are not finite")
        if np.any(s <= 0):
            raise NonInterior("point is not strictly feasible")
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be positive and finite")
        return cls(np.asarray(x, float), np.asarray(w, float), float(t), s)


@dataclass
class CentralityReport:
    delta_t: float
    gamma: float
    phi: float
    w_tracking_error: float


def penalized_objective(poly: Polytope, it: WeightedIterate, c: np.ndarray) -> float:
    if np.any(it.s <= 0):
        raise NonInterior("penalized objective needs positive slacks")
    return float(it.t * c @ it.x - it.w @ np.log(it.s))


def _gradient(poly: Polytope, it: WeightedIterate, c: np.ndarray) -> np.ndarray:
    return it.t * c - poly.A.T @ (it.w / it.s)


def _hessian_factor(poly: Polytope, it: WeightedIterate) -> NormalFactor:
    return NormalFactor(poly.A, it.w / it.s**2)


def newton_step(poly: Polytope, it: WeightedIterate, c: np.ndarray) -> np.ndarray:
    """``(A^T S^-1 W S^-1 A)^{-1} (t c - A^T S^-1 w)``."""
    return _hessian_factor(poly, it).solve(_gradient(poly, it, c))


def _step_and_centrality(
    poly: Polytope, it: WeightedIterate, c: np.ndarray
) -> tuple[np.ndarray, float]:
    factor = _hessian_factor(poly, it)
    grad = _gradient(poly, it, c)
    y = factor.half_solve(grad)
    h = factor.solve(grad)
    return h, float(np.linalg.norm(y))


def centrality(poly: Polytope, it: WeightedIterate, c: np.ndarray) -> float:
    """Newton step length measured in the Hessian norm."""
    return _step_and_centrality(poly, it, c)[1]


def slack_sensitivity_at(poly: Polytope, it: WeightedIterate) -> float:
    sigma = NormalFactor(poly.A / it.s[:, None], it.w).leverage_scores()
    return float(np.sqrt(np.max(sigma / it.w)))


def r_step(
    poly: Polytope,
    it: WeightedIterate,
    c: np.ndarray,
    r: float,
    gamma_bound: float | None = None,
    h: np.ndarray | None = None,
    delta: float | None = None,
) -> WeightedIterate:
    """Split a Newton step between the point (share ``1/(1+r)``) and the weights.

    The weights change by ``r/(1+r) * W S^-1 A h`` so that each weight moves
    ``-r`` times as much as its slack in relative terms.  ``gamma_bound``
    stands in for the slack sensitivity in the stability check; when it is
    None the exact value is computed.
    """
    if h is None or delta is None:
        h, delta = _step_and_centrality(poly, it, c)
    gamma = slack_sensitivity_at(poly, it) if gamma_bound is None else gamma_bound
    if delta * gamma > 0.125 * (1 + 1e-12):
        raise StepTooLarge(f"delta*gamma = {delta * gamma:.3e} exceeds 1/8")
    Ah_over_s = (poly.A @ h) / it.s
    x_new = it.x - h / (1.0 + r)
    w_new = it.w * (1.0 + (r / (1.0 + r)) * Ah_over_s)
    s_new = poly.slacks(x_new)
    if np.any(s_new <= 0) or np.any(w_new <= 0):
        raise NonInterior("r-step left the interior")
    return WeightedIterate(x_new, w_new, it.t, s_new)


def centering_exact(
    poly: Polytope,
    it: WeightedIterate,
    c: np.ndarray,
    cfg: WeightConfig,
    weight_tol: float = 1e-12,
) -> WeightedIterate:
    """Damped Newton step with weights recomputed exactly at the new slacks."""
    h = newton_step(poly, it, c)
    x_new = it.x - h / (1.0 + cfg.c_r)
    s_new = poly.slacks(x_new)
    if np.any(s_new <= 0):
        raise NonInterior("exact centering left the interior")
    w_new = newton_weight(poly.A, s_new, it.w, cfg, tol=weight_tol)
    return WeightedIterate(x_new, w_new, it.t, s_new)


WeightOracle = Callable[[np.ndarray, np.ndarray, float, np.random.Generator], np.ndarray]


def make_weight_oracle(poly: Polytope, cfg: WeightConfig, kind: str) -> WeightOracle:
    """Oracle ``(s, w_start, accuracy, rng) -> approximate g(s)``."""
    if kind == "newton":
        def oracle(s, w_start, acc, rng):
            return newton_weight(poly.A, s, w_start, cfg, tol=min(acc, 1e-9))
    elif kind == "sketch":
        def oracle(s, w_start, acc, rng):
            return compute_weight(poly.A, s, w_start, acc, cfg, rng)
    else:
        raise ValueError(f"unknown weight oracle {kind!r}")
    return oracle


@dataclass
class StepInfo:
    delta_before: float
    observed: np.ndarray  # approximate weight at the new slacks


def centering_inexact(
    poly: Polytope,
    it: WeightedIterate,
    c: np.ndarray,
    wcfg: WeightConfig,
    ccfg: CenteringConfig,
    rng: np.random.Generator,
    oracle: WeightOracle | None = None,
    gamma_bound: float | None = None,
) -> tuple[WeightedIterate, StepInfo]:
    """One r-step followed by a potential-guided pull of the weights toward ``g``."""
    if oracle is None:
        oracle = make_weight_oracle(poly, wcfg, "sketch")
    if gamma_bound is None:
        gamma_bound = wcfg.c_gamma * math.exp(wcfg.K)
    h, delta = _step_and_centrality(poly, it, c)
    mid = r_step(poly, it, c, wcfg.c_r, gamma_bound, h=h, delta=delta)
    z = oracle(mid.s, mid.w, ccfg.R, rng)
    info = StepInfo(delta, z)
    if delta == 0.0:
        return mid, info
    moves = MoveSet(
        weight_norm_bound=(wcfg.c_r + 0.14) / (wcfg.c_r + 1.0) * delta,
        inf_norm_bound=4.0 * wcfg.c_gamma * delta,
        w=mid.w,
    )
    pcfg = PotentialConfig(mu=ccfg.mu, R=ccfg.R, eps_game=ccfg.eps_game)
    # the move lowers the potential of log z - log w, so log w takes its negative
    move = chasing_zero_move(np.log(z) - np.log(mid.w), moves, pcfg)
    w_final = mid.w * np.exp(-move)
    return WeightedIterate(mid.x, w_final, mid.t, mid.s), info


def audit(
    poly: Polytope,
    it: WeightedIterate,
    c: np.ndarray,
    wcfg: WeightConfig,
    ccfg: CenteringConfig,
    g: np.ndarray | None = None,
) -> CentralityReport:
    """Exact centrality, slack sensitivity, potential and tracking error."""
    if g is None:
        g = newton_weight(poly.A, it.s, it.w, wcfg, tol=1e-12)
    psi = np.log(g) - np.log(it.w)
    try:
        phi = potential(psi, ccfg.mu)
    except Overflow:
        phi = math.inf
    return CentralityReport(
        delta_t=centrality(poly, it, c),
        gamma=slack_sensitivity_at(poly, it),
        phi=phi,
        w_tracking_error=float(np.max(np.abs(psi))),
    )


@dataclass
class PathStats:
    iterations: int = 0
    audits: int = 0
    rollbacks: int = 0
    max_delta: float = 0.0
    last_report: CentralityReport | None = None


@dataclass
class _Certificate:
    h: np.ndarray
    delta: float
    gamma: float


# Row scaling never changes rank and the path matrices have full column rank,
# so along the path a pivot only has to be nonzero and finite; a relative
# floor would mistake the grading of nearly tight rows for rank loss.
PATH_PIVOT_FLOOR = 0.0


class Stepper:
    """Compiled-kernel version of one inexact centering step.

    Holds the polytope, cost and configuration, plus the most recent weight
    estimate, which warm-starts the next weight computation.
    """

    def __init__(
        self,
        poly: Polytope,
        c: np.ndarray,
        wcfg: WeightConfig,
        ccfg: CenteringConfig,
        pcfg: PathConfig,
        pivot_floor: float = PATH_PIVOT_FLOOR,
    ):
        self.poly = poly
        self.c = np.ascontiguousarray(c, dtype=float)
        self.wcfg = wcfg
        self.ccfg = ccfg
        self.pcfg = pcfg
        self.floor = pivot_floor
        self.game = PotentialConfig(mu=ccfg.mu, R=ccfg.R, eps_game=ccfg.eps_game)
        self.latest_weight: np.ndarray | None = None
        self.latest_slacks: np.ndarray | None = None
        # linear systems solved inside compiled kernels
        self.solves = 0

    def certify(self, it: WeightedIterate) -> _Certificate:
        h, delta, gamma, ok = kernels.newton_data(
            self.poly.A, it.s, it.w, it.t * self.c, self.floor
        )
        self.solves += 1
        if not ok:
            raise RankDeficient("Hessian factorization failed")
        return _Certificate(h, float(delta), float(gamma))

    def weight_at(self, s: np.ndarray, w_start: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        wcfg = self.wcfg
        if self.pcfg.weight_oracle == "sketch":
            return compute_weight(self.poly.A, s, w_start, self.ccfg.R, wcfg, rng)
        As = self.poly.A / s[:, None]
        z = w_start
        for _ in range(8):
            z_new, err, step, ok = kernels.weight_newton_step(As, z, wcfg.alpha, wcfg.beta, self.floor)
            self.solves += 2
            if not ok:
                break
            z = z_new
            if step <= 1e-10:
                return z
        # fall back to the globalized solver from the best point so far
        return newton_weight(self.poly.A, s, z, wcfg, tol=1e-11, pivot_floor=self.floor)

    def exact_weight_near(self, s: np.ndarray, start: np.ndarray) -> np.ndarray:
        """Weight function value from a nearby start; Newton first, globalized fallback."""
        As = self.poly.A / s[:, None]
        z, ok, steps = kernels.exact_weight_polish(
            As, start, self.wcfg.alpha, self.wcfg.beta, self.floor, 8, AUDIT_WEIGHT_STEP
        )
        # each Newton step factors the n x n Gram matrix and solves one m x m system
        self.solves += 2 * steps
        if ok:
            return z
        return newton_weight(self.poly.A, s, z, self.wcfg, tol=AUDIT_WEIGHT_TOL, pivot_floor=self.floor)

    def report(self, it: WeightedIterate, cert: _Certificate) -> CentralityReport:
        fresh = self.latest_slacks is not None and self.latest_slacks is it.s
        if fresh and self.pcfg.weight_oracle != "tracking":
            g = self.latest_weight
        else:
            start = self.latest_weight if fresh else it.w
            g = self.exact_weight_near(it.s, start)
        psi = np.log(g) - np.log(it.w)
        try:
            phi = potential(psi, self.ccfg.mu)
        except Overflow:
            phi = math.inf
        return CentralityReport(cert.delta, cert.gamma, phi, float(np.max(np.abs(psi))))

    def step(self, it: WeightedIterate, cert: _Certificate, rng: np.random.Generator) -> WeightedIterate:
        wcfg, poly = self.wcfg, self.poly
        r = wcfg.c_r
        gamma = cert.gamma if self.pcfg.step_gamma_bound is None else self.pcfg.step_gamma_bound
        delta = cert.delta
        if delta * gamma > 0.125:
            raise StepTooLarge(f"delta*gamma = {delta * gamma:.3e} exceeds 1/8")
        if self.pcfg.weight_oracle == "tracking":
            return self._fused_step(it, cert, r)
        rel = (poly.A @ cert.h) / it.s
        x_new = it.x - cert.h / (1.0 + r)
        s_new = it.s * (1.0 - rel / (1.0 + r))
        w_mid = it.w * (1.0 + (r / (1.0 + r)) * rel)
        if np.any(s_new <= 0) or np.any(w_mid <= 0):
            raise NonInterior("r-step left the interior")
        start = self.latest_weight if self.latest_weight is not None else w_mid
        z = self.weight_at(s_new, start, rng)
        if delta > 0.0:
            root_w = np.sqrt(w_mid)
            b = (r + 0.14) / (r + 1.0) * delta
            cap = 4.0 * wcfg.c_gamma * delta
            grad = potential_gradient(np.log(z) - np.log(w_mid), self.game.mu)
            if np.any(grad):
                if self.pcfg.projects_moves:
                    psi = np.log(z) - np.log(w_mid)
                    u = kernels.project_ball_box(psi * root_w / b, cap * root_w / b)
                    lift = u * b / root_w
                else:
                    u = kernels.ball_box(grad / root_w, cap * root_w / b)
                    lift = (1.0 + self.game.eps_game) * u * b / root_w
                if self.pcfg.clips_moves:
                    psi = np.log(z) - np.log(w_mid)
                    lift = np.where(np.abs(lift) > np.abs(psi), psi, lift)
                w_new = w_mid * np.exp(lift)
            else:
                w_new = w_mid
        else:
            w_new = w_mid
        self.latest_weight = z
        self.latest_slacks = s_new
        return WeightedIterate(x_new, w_new, it.t, s_new)


    def _fused_step(self, it: WeightedIterate, cert: _Certificate, r: float) -> WeightedIterate:
        wcfg, ccfg = self.wcfg, self.ccfg
        start = self.latest_weight if self.latest_weight is not None else it.w
        x_new, s_new, w_new, z, status = kernels.centering_step(
            self.poly.A, it.x, it.s, it.w, cert.h, cert.delta, r, start,
            wcfg.alpha, wcfg.beta, self.pcfg.tracking_box, self.pcfg.tracking_rounds,
            ccfg.mu, ccfg.eps_game, wcfg.c_gamma, self.floor, self.pcfg.clips_moves,
            self.pcfg.projects_moves,
        )
        if status == kernels.NON_INTERIOR:
            raise NonInterior("r-step left the interior")
        if status == kernels.RANK_DEFICIENT:
            raise RankDeficient("weight factorization failed")
        if status == kernels.OVERFLOW:
            raise Overflow("potential argument out of range")
        self.latest_weight = z
        self.latest_slacks = s_new
        return WeightedIterate(x_new, w_new, it.t, s_new)


_STEP_ERRORS = (StepTooLarge, NonInterior, Overflow, RankDeficient, NoConvergence, NonFinite)


def path_following(
    poly: Polytope,
    it: WeightedIterate,
    c: np.ndarray,
    t_end: float,
    wcfg: WeightConfig,
    ccfg: CenteringConfig,
    pcfg: PathConfig,
    rng: np.random.Generator,
    stats: PathStats | None = None,
    delta_limit: float | None = None,
    stop: Callable[[WeightedIterate, CentralityReport], bool] | None = None,
    stepper: Stepper | None = None,
) -> WeightedIterate:
    """Follow the weighted path from ``it.t`` toward ``t_end`` (either direction).

    Each iteration certifies the current iterate (centrality and slack
    sensitivity from one factorization), takes one inexact centering step
    and rescales ``t`` by the growth factor.  Every audit period the
    certified iterate is checked against the centrality limit, the weight
    tracking budget ``ccfg.K`` and the potential budget; a passing iterate
    becomes the rollback snapshot, a failing one is discarded in favour of
    the snapshot and the next attempt uses half the growth; the growth then
    recovers by the factor ``pcfg.growth_recovery`` per passed audit.  The loop ends
    at an audited iterate once ``t_end`` is reached or ``stop`` returns True.

    With the tracking oracle the steps between two audits run as one
    compiled segment.
    """
    stats = stats if stats is not None else PathStats()
    m, n = poly.m, poly.n
    growth = pcfg.growth(n, wcfg, m)
    up = t_end >= it.t
    period = pcfg.period(m, wcfg)
    if delta_limit is not None:
        limit = delta_limit
    elif pcfg.strict_constants:
        limit = ccfg.delta_target
    else:
        # the exact slack sensitivity is at hand, so the r-step condition
        # delta * gamma <= 1/8 alone decides
        limit = math.inf
    stepper = stepper or Stepper(poly, c, wcfg, ccfg, pcfg)
    fused = pcfg.weight_oracle == "tracking"
    trace = pcfg.trace

    def reached(t: float) -> bool:
        return t >= t_end if up else t <= t_end

    snapshot = None
    failures = 0
    # growth multiplier: halved on every rollback, recovered gradually
    pace = 1.0
    since_audit = period  # audit the starting point
    while True:
        if stats.iterations >= pcfg.max_iters:
            raise IterationLimit(f"iteration budget {pcfg.max_iters} exhausted at t={it.t:.3e}")
        synced = _resync_slacks(poly, it, stepper)
        failed = synced is None
        if failed:
            log.debug("slacks recomputed from x are not positive at t=%.3e", it.t)
        else:
            it = synced
            try:
                cert = stepper.certify(it)
            except _STEP_ERRORS as exc:
                log.debug("certification failed at t=%.3e: %s", it.t, exc)
                failed = True
        done = reached(it.t)
        if not failed and (done or since_audit >= period):
            stats.audits += 1
            since_audit = 0
            try:
                rep = stepper.report(it, cert)
                stats.last_report = rep
                failed = not (
                    rep.delta_t <= limit
                    and rep.delta_t * rep.gamma <= 0.125
                    and rep.phi <= ccfg.phi_budget
                    and rep.w_tracking_error <= ccfg.K
                )
                if failed:
                    log.debug("audit rejected t=%.3e: %s", it.t, rep)
            except _STEP_ERRORS as exc:
                log.debug("audit failed: %s", exc)
                failed = True
            if not failed:
                snapshot = (
                    WeightedIterate(it.x.copy(), it.w.copy(), it.t, it.s.copy()),
                    copy.deepcopy(rng.bit_generator.state),
                    stepper.latest_weight,
                    stepper.latest_slacks,
                )
                failures = 0
                pace = min(1.0, pace * pcfg.growth_recovery)
                if trace is not None:
                    trace.append(
                        {
                            "iter": stats.iterations,
                            "t": it.t,
                            "delta": rep.delta_t,
                            "gamma": rep.gamma,
                            "phi": rep.phi,
                            "tracking_error": rep.w_tracking_error,
                            "audit": True,
                        }
                    )
                if done or (stop is not None and stop(it, rep)):
                    return it
        if not failed:
            g = growth * pace
            budget = min(period - since_audit, pcfg.max_iters - stats.iterations)
            if fused:
                it, failed = _advance_segment(stepper, it, t_end, g, max(budget, 1), stats, trace)
                since_audit = period
            else:
                stats.max_delta = max(stats.max_delta, cert.delta)
                try:
                    if trace is not None:
                        trace.append(
                            {"iter": stats.iterations, "t": it.t, "delta": cert.delta, "gamma": cert.gamma}
                        )
                    it = stepper.step(it, cert, rng)
                    stats.iterations += 1
                    since_audit += 1
                    next_t = it.t * (1.0 + g) if up else it.t / (1.0 + g)
                    if (up and next_t > t_end) or (not up and next_t < t_end):
                        next_t = t_end
                    it = replace(it, t=next_t)
                except _STEP_ERRORS as exc:
                    log.debug("step failed at t=%.3e: %s", it.t, exc)
                    stats.iterations += 1
                    failed = True
        if failed:
            if snapshot is None:
                raise StepTooLarge(f"starting point at t={it.t:.3e} fails the path invariants")
            stats.rollbacks += 1
            failures += 1
            pace *= 0.5
            if failures >= pcfg.max_consecutive_rollbacks:
                raise RollbackLoop(f"{failures} consecutive rollbacks at t={snapshot[0].t:.3e}")
            base, state, lw, ls = snapshot
            it = WeightedIterate(base.x.copy(), base.w.copy(), base.t, base.s.copy())
            stepper.latest_weight, stepper.latest_slacks = lw, ls
            rng.bit_generator.state = state
            # fresh randomness for the retry
            rng.bit_generator.advance(failures << 32)
            since_audit = 0


# drift (in units of the rounding error of A x - b) that triggers a resync
RESYNC_MARGIN = 1e4


def _resync_slacks(poly: Polytope, it: WeightedIterate, stepper: Stepper) -> WeightedIterate | None:
    """Bring the carried slacks back in line with ``A x - b``.

    The steps update ``x`` and ``s`` separately, so rounding lets them part
    over many steps; the error is absolute, and once slacks shrink by orders
    of magnitude it dominates.  A carried slack is replaced only where it
    differs from ``A x - b`` by more than the rounding error of that
    product by a wide margin: within it the carried slack, updated
    multiplicatively, is the more accurate of the two.  Returns None when a replaced slack is not positive.
    """
    s_true = poly.slacks(it.x)
    noise = np.finfo(float).eps * (np.abs(poly.A) @ np.abs(it.x) + np.abs(poly.b))
    drifted = np.abs(s_true - it.s) > RESYNC_MARGIN * noise
    if not np.any(drifted):
        return it
    if not np.all(s_true[drifted] > 0):
        return None
    s = np.where(drifted, s_true, it.s)
    if stepper.latest_slacks is it.s and np.max(np.abs(s - it.s) / it.s) <= 1e-10:
        # same point for the cached weight estimate
        stepper.latest_slacks = s
    return WeightedIterate(it.x, it.w, it.t, s)


_SEGMENT_ERRORS = {
    kernels.NON_INTERIOR: "r-step left the interior",
    kernels.RANK_DEFICIENT: "factorization failed",
    kernels.OVERFLOW: "potential argument out of range",
    kernels.STEP_TOO_LARGE: "delta*gamma exceeds 1/8",
}


def _advance_segment(
    stepper: Stepper,
    it: WeightedIterate,
    t_end: float,
    growth: float,
    steps: int,
    stats: PathStats,
    trace: list | None,
) -> tuple[WeightedIterate, bool]:
    wcfg, ccfg, pcfg = stepper.wcfg, stepper.ccfg, stepper.pcfg
    z = stepper.latest_weight if stepper.latest_weight is not None else it.w
    gamma_bound = pcfg.step_gamma_bound if pcfg.step_gamma_bound is not None else 0.0
    x, s, w, z, t, taken, status, ts, deltas, gammas = kernels.run_segment(
        stepper.poly.A, stepper.c, it.x, it.s, it.w, z, it.t, t_end, growth, steps,
        wcfg.c_r, wcfg.alpha, wcfg.beta, pcfg.tracking_box, pcfg.tracking_rounds,
        ccfg.mu, ccfg.eps_game, wcfg.c_gamma, stepper.floor, gamma_bound, pcfg.clips_moves,
        pcfg.projects_moves,
    )
    if trace is not None:
        base = stats.iterations
        trace.extend(
            {"iter": base + k, "t": float(ts[k]), "delta": float(deltas[k]), "gamma": float(gammas[k])}
            for k in range(taken)
        )
    stats.iterations += int(taken)
    stepper.solves += int(taken) * (1 + pcfg.tracking_rounds) + (status != kernels.OK)
    if taken:
        stats.max_delta = max(stats.max_delta, float(deltas.max()))
    if status != kernels.OK:
        log.debug("segment stopped at t=%.3e: %s", t, _SEGMENT_ERRORS.get(status, status))
        stats.iterations += 1
        return it, True
    stepper.latest_weight = z
    stepper.latest_slacks = s
    return WeightedIterate(x, w, float(t), s), False
