"""The regularized log-det weight function and the routines that evaluate it.

For slacks ``s`` the weight ``g(s)`` minimizes

    1^T w - (1/alpha) log det(A_s^T W^alpha A_s) - beta * sum(log w)

over positive ``w``, where ``A_s = S^{-1} A``.  Its stationarity condition
is the fixed point ``w = sigma(w^alpha) + beta`` with ``sigma`` the leverage
scores of ``A_s``.
"""

from __future__ import annotations

import math

import numpy as np

from .config import WeightConfig
from .errors import NoConvergence, RankDeficient
from .linalg import PIVOT_FLOOR, NormalFactor, graded_order, jl_dimension, sketched_scores


def _rows_over_slack(A: np.ndarray, s: np.ndarray) -> np.ndarray:
    return A / s[:, None]


def leverage_and_laplacian(As: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Leverage scores and the dense matrix ``Sigma - P*P`` (entrywise square)."""
    P = NormalFactor(As, x).projection()
    sigma = np.diag(P).copy()
    return sigma, np.diag(sigma) - P * P


def weight_objective(A: np.ndarray, s: np.ndarray, w: np.ndarray, cfg: WeightConfig) -> float:
    factor = NormalFactor(_rows_over_slack(A, s), w**cfg.alpha)
    return float(np.sum(w) - factor.logdet() / cfg.alpha - cfg.beta * np.sum(np.log(w)))


def weight_gradient(
    A: np.ndarray,
    s: np.ndarray,
    w: np.ndarray,
    cfg: WeightConfig,
    exact: bool = True,
    rng: np.random.Generator | None = None,
    eps: float = 0.1,
) -> np.ndarray:
    factor = NormalFactor(_rows_over_slack(A, s), w**cfg.alpha)
    if exact:
        sigma = factor.leverage_scores()
    else:
        if rng is None:
            raise ValueError("sketched gradient needs a random source")
        sigma = sketched_scores(factor, jl_dimension(A.shape[0], eps), rng)
    return 1.0 - (sigma + cfg.beta) / w


def weight_hessian(A: np.ndarray, s: np.ndarray, w: np.ndarray, cfg: WeightConfig) -> np.ndarray:
    """Dense Hessian of the objective in ``w``; small instances only."""
    sigma, lap = leverage_and_laplacian(_rows_over_slack(A, s), w**cfg.alpha)
    inner = np.diag(sigma + cfg.beta) - cfg.alpha * lap
    return inner / w[:, None] / w[None, :]


def fixed_point_residual(A: np.ndarray, s: np.ndarray, w: np.ndarray, cfg: WeightConfig) -> np.ndarray:
    """Relative residual ``(w - sigma(w^alpha) - beta) / w``."""
    sigma = NormalFactor(_rows_over_slack(A, s), w**cfg.alpha).leverage_scores()
    return (w - sigma - cfg.beta) / w


def exact_weight(
    A: np.ndarray,
    s: np.ndarray,
    w0: np.ndarray | None,
    cfg: WeightConfig,
    target_accuracy: float = 1e-12,
    max_iter: int | None = None,
    reanchor: bool = True,
) -> np.ndarray:
    """Box-constrained averaging iteration with exact leverage scores.

    Each step clamps ``(w + sigma(w^alpha) + beta) / 2`` coordinatewise into
    ``w0 * [1 - r, 1 + r]`` with ``r = (1 - alpha) / 24``.  When the iterate
    settles on the box boundary and ``reanchor`` is set, the box is re-centred
    at the current iterate and the iteration continues.  ``w0=None`` starts
    from ``sigma(1) + beta``.
    """
    As = _rows_over_slack(A, s)
    m = A.shape[0]
    if max_iter is None:
        max_iter = 64 * math.ceil(12.0 / (1.0 - cfg.alpha))
    if w0 is None:
        w0 = NormalFactor(As, np.ones(m)).leverage_scores() + cfg.beta
    radius = (1.0 - cfg.alpha) / 24.0
    anchor = np.asarray(w0, dtype=float).copy()
    lo, hi = anchor * (1 - radius), anchor * (1 + radius)
    w = anchor.copy()
    for _ in range(max_iter):
        sigma = NormalFactor(As, w**cfg.alpha).leverage_scores()
        raw = 0.5 * (w + sigma + cfg.beta)
        w_new = np.clip(raw, lo, hi)
        step = np.max(np.abs(w_new - w) / w)
        w = w_new
        clamped = np.any(raw != w_new)
        if step < target_accuracy:
            if not clamped:
                return w
            if not reanchor:
                raise NoConvergence("iteration stalled on the trust box boundary")
        if clamped and reanchor and step < radius / 4:
            anchor = w.copy()
            lo, hi = anchor * (1 - radius), anchor * (1 + radius)
    raise NoConvergence(f"exact_weight did not converge in {max_iter} steps")


ROUNDOFF_FLOOR = 1e-8
# relative residual below which Newton's method is in its quadratic region
NEWTON_REGION = 1e-3
# refuse sketches whose random matrix would not fit comfortably in memory
MAX_SKETCH_ENTRIES = 50_000_000


def _objective_pieces(As: np.ndarray, w: np.ndarray, cfg: WeightConfig, pivot_floor: float = PIVOT_FLOOR):
    # QR of the row-weighted matrix: the projection error then grows with
    # its condition number rather than with the square of it
    B = As * np.sqrt(w**cfg.alpha)[:, None]
    order = graded_order(B)
    Qs, R = np.linalg.qr(B[order])
    Q = np.empty_like(Qs)
    Q[order] = Qs
    rdiag = np.abs(np.diag(R))
    if not np.all(np.isfinite(R)) or np.any(rdiag <= pivot_floor * np.linalg.norm(R, axis=0)):
        raise RankDeficient("weighted matrix lost rank")
    P = Q @ Q.T
    sigma = np.diag(P).copy()
    logdet = 2.0 * float(np.sum(np.log(rdiag)))
    value = float(np.sum(w) - logdet / cfg.alpha - cfg.beta * np.sum(np.log(w)))
    return value, sigma, np.diag(sigma) - P * P


def newton_weight(
    A: np.ndarray,
    s: np.ndarray,
    w0: np.ndarray | None,
    cfg: WeightConfig,
    tol: float = 1e-12,
    max_iter: int = 100,
    pivot_floor: float = PIVOT_FLOOR,
) -> np.ndarray:
    """Damped Newton's method on the (convex) weight objective.

    The relative step ``dw / w`` solves ``(Sigma + beta I - alpha Lam) d = -F``
    where ``F = w - sigma(w^alpha) - beta``; this is the Newton system of the
    objective written in relative coordinates.  Backtracking keeps the
    weights positive and the objective decreasing.  Stops when the relative
    residual ``max |F| / w`` drops below ``tol``.
    """
    As = _rows_over_slack(A, s)
    m = A.shape[0]
    if w0 is None:
        w0 = NormalFactor(As, np.ones(m), pivot_floor).leverage_scores() + cfg.beta
    w = np.asarray(w0, dtype=float).copy()
    f, sigma, lap = _objective_pieces(As, w, cfg, pivot_floor)
    best, best_w, stalled = math.inf, w, 0
    for _ in range(max_iter):
        resid = w - sigma - cfg.beta
        err = float(np.max(np.abs(resid) / w))
        if err <= tol:
            return w
        # below 1e-8 a residual that stops improving is at the round-off floor
        stalled = stalled + 1 if err >= 0.5 * best else 0
        if err < best:
            best, best_w = err, w
        if stalled >= 3 and best <= ROUNDOFF_FLOOR:
            return best_w
        J = np.diag(sigma + cfg.beta) - cfg.alpha * lap
        d = -np.linalg.solve(J, resid)
        # directional derivative of the objective along w * d
        slope = float(np.sum(resid / w * w * d))
        tau = 1.0
        lowest = float(np.min(d))
        if lowest < -0.5:
            tau = 0.5 / -lowest
        for _ in range(60):
            w_try = w * (1.0 + tau * d)
            try:
                f_try, s_try, l_try = _objective_pieces(As, w_try, cfg, pivot_floor)
            except RankDeficient:
                tau *= 0.5
                continue
            if f_try <= f + 1e-4 * tau * slope:
                break
            # near the solution the objective stops resolving progress (its
            # rounding error can exceed the predicted decrease); the residual
            # is the merit function there
            e_try = float(np.max(np.abs(w_try - s_try - cfg.beta) / w_try))
            if (err <= NEWTON_REGION or abs(f_try - f) <= 1e-12 * max(1.0, abs(f))) and e_try < err:
                break
            tau *= 0.5
        else:
            if best <= tol:
                return best_w
            raise NoConvergence(f"newton_weight line search failed at residual {best:.1e}")
        w, f, sigma, lap = w_try, f_try, s_try, l_try
    resid = w - sigma - cfg.beta
    err = float(np.max(np.abs(resid) / w))
    if err < best:
        best, best_w = err, w
    if best <= tol:
        return best_w
    raise NoConvergence(f"newton_weight did not reach {tol:.1e} in {max_iter} steps (best {best:.1e})")


def weight_jacobian(
    A: np.ndarray, s: np.ndarray, cfg: WeightConfig, g: np.ndarray | None = None
) -> np.ndarray:
    """Jacobian of ``g`` with respect to ``s``: ``-2 G (G - alpha Lam)^{-1} Lam S^{-1}``."""
    if g is None:
        g = newton_weight(A, s, None, cfg)
    _, lap = leverage_and_laplacian(_rows_over_slack(A, s), g**cfg.alpha)
    inner = np.linalg.solve(np.diag(g) - cfg.alpha * lap, lap / s[None, :])
    return -2.0 * g[:, None] * inner


def sketch_accuracy(m: int, K: float, cfg: WeightConfig) -> float:
    return K / (48.0 * cfg.c_r * math.log(2.0 * m / K))


def sketch_rounds(m: int, K: float, cfg: WeightConfig) -> int:
    return math.ceil(12.0 * cfg.c_r * math.log(4.0 * m / K))


def compute_weight(
    A: np.ndarray,
    s: np.ndarray,
    w0: np.ndarray,
    K: float,
    cfg: WeightConfig,
    rng: np.random.Generator,
    sketch: str = "auto",
    early_stop: float | None = None,
    jl_constant: float = 24.0,
) -> np.ndarray:
    """Approximate ``g(s)`` to relative accuracy ``K`` from a nearby start ``w0``.

    Runs the clamped averaging step with sketched leverage scores for the
    prescribed number of rounds.  ``sketch="auto"`` switches to exact
    scores whenever the sketch would need at least ``m`` vectors, since it
    is then no cheaper than the exact computation.  ``early_stop`` ends the
    loop once a round moves every weight by less than that relative amount.
    """
    if sketch not in ("auto", "always", "never"):
        raise ValueError(f"unknown sketch policy {sketch!r}")
    As = _rows_over_slack(A, s)
    m = A.shape[0]
    eps = sketch_accuracy(m, K, cfg)
    k = jl_dimension(m, eps, jl_constant) if eps < 1.0 else 1
    use_sketch = sketch == "always" or (sketch == "auto" and k < m)
    if use_sketch and k * m > MAX_SKETCH_ENTRIES:
        raise ValueError(f"sketch needs {k} vectors of length {m}; use sketch='auto'")
    radius = cfg.box_radius
    lo, hi = w0 * (1 - radius), w0 * (1 + radius)
    w = np.asarray(w0, dtype=float).copy()
    for _ in range(sketch_rounds(m, K, cfg)):
        factor = NormalFactor(As, w**cfg.alpha)
        sigma = sketched_scores(factor, k, rng) if use_sketch else factor.leverage_scores()
        w_new = np.clip(0.5 * (w + sigma + cfg.beta), lo, hi)
        step = np.max(np.abs(w_new - w) / w)
        w = w_new
        if early_stop is not None and step < early_stop:
            break
    return w


def beta_derivative(A: np.ndarray, s: np.ndarray, g: np.ndarray, cfg: WeightConfig) -> np.ndarray:
    """Derivative of the weight with respect to the regularization ``beta``."""
    _, lap = leverage_and_laplacian(_rows_over_slack(A, s), g**cfg.alpha)
    return g * np.linalg.solve(np.diag(g) - cfg.alpha * lap, np.ones_like(g))


def compute_initial_weight(
    A: np.ndarray,
    s: np.ndarray,
    K: float,
    cfg: WeightConfig,
    rng: np.random.Generator,
    decay_constant: float = 10.0,
    adaptive: bool = True,
    oracle: str = "newton",
    max_steps: int = 1_000_000,
) -> np.ndarray:
    """Weights for slacks ``s`` via a homotopy on the regularization strength.

    Starts at a large regularization where ``beta * 1`` is already close
    to the weight, then shrinks it to ``cfg.beta`` while tracking the
    weight.  With ``adaptive`` the shrink factor grows after every accepted
    step and halves whenever the tracked weight would move by more than
    ``1/(12 c_r)`` in relative terms; the starting factor is the fixed
    schedule with ``decay_constant`` in the denominator.
    """
    m, n = A.shape
    c_r = cfg.c_r
    beta_hat = 12.0 * c_r
    beta_final = cfg.beta
    base = (1.0 - cfg.alpha) ** 1.5 / (decay_constant * c_r**2 * math.sqrt(n))
    frac = base
    w = np.full(m, beta_hat)
    track_K = 1.0 / (50.0 * c_r)

    def track(w_start: np.ndarray, beta: float) -> np.ndarray:
        sub = cfg.with_beta(beta)
        if oracle == "newton":
            return newton_weight(A, s, w_start, sub, tol=min(track_K, 1e-10))
        return compute_weight(A, s, w_start, track_K, sub, rng, early_stop=track_K / 10)

    w = track(w, beta_hat)
    steps = 0
    while beta_hat > beta_final:
        steps += 1
        if steps > max_steps:
            raise NoConvergence("beta homotopy exceeded its step budget")
        beta_next = max(beta_hat * (1.0 - frac), beta_final)
        if not adaptive:
            w = track(w, beta_next)
            beta_hat = beta_next
            continue
        try:
            w_next = track(w, beta_next)
            # a move that reaches the trust box edge was clamped, so the
            # tracked weight lags the true one; only strictly inside counts
            ok = np.max(np.abs(w_next - w) / w) <= (1.0 - 1e-6) * cfg.box_radius
        except (NoConvergence, RankDeficient):
            ok = False
        if ok:
            w, beta_hat = w_next, beta_next
            frac = min(2.0 * frac, 0.5)
        else:
            frac *= 0.5
            if frac < base * 1e-6:
                raise NoConvergence("beta homotopy step collapsed")
    if oracle == "newton":
        return newton_weight(A, s, w, cfg, tol=min(K, 1e-10))
    return compute_weight(A, s, w, K, cfg, rng, early_stop=K / 10)
