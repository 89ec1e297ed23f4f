"""Dense normal-equation solves and leverage scores.

Everything here works on a row-scaled system ``A^T diag(d) A``.  The
factorization is computed once and reused for every right-hand side.
"""

from __future__ import annotations

import contextvars
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import NonFinite, RankDeficient

PIVOT_FLOOR = 1e-12

# per-context count of factorizations, read by the driver for its report
_factor_count: contextvars.ContextVar[list[int] | None] = contextvars.ContextVar(
    "factor_count", default=None
)


def start_counting() -> list[int]:
    box = [0]
    _factor_count.set(box)
    return box


@dataclass(frozen=True)
class SolveTolerance:
    relative_accuracy: float = 1e-10
    max_refinement_steps: int = 2

    def __post_init__(self):
        if not 0.0 < self.relative_accuracy < 1.0:
            raise ValueError("relative_accuracy must lie in (0, 1)")
        if self.max_refinement_steps < 0:
            raise ValueError("max_refinement_steps must be nonnegative")


def check_constraint_matrix(A: np.ndarray) -> np.ndarray:
    """Validate shape and content of a constraint matrix and return it as float."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.size == 0:
        raise ValueError("constraint matrix must be a nonempty 2-d array")
    m, n = A.shape
    if m < n:
        raise ValueError(f"need at least as many rows as columns, got {m}x{n}")
    if not np.all(np.isfinite(A)):
        raise NonFinite("constraint matrix has non-finite entries")
    if np.any(~A.any(axis=1)):
        raise ValueError("constraint matrix has an all-zero row")
    if np.any(~A.any(axis=0)):
        raise ValueError("constraint matrix has an all-zero column")
    return A


def _check_diag(d: np.ndarray, m: int) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    if d.shape != (m,):
        raise ValueError(f"diagonal has shape {d.shape}, expected ({m},)")
    if not np.all(np.isfinite(d)):
        raise NonFinite("diagonal has non-finite entries")
    if np.any(d <= 0):
        raise ValueError("diagonal must be strictly positive")
    return d


def graded_order(B: np.ndarray) -> np.ndarray:
    """Row order by decreasing norm; Householder QR is accurate on graded rows in this order."""
    return np.argsort(-np.einsum("ij,ij->i", B, B), kind="stable")


class NormalFactor:
    """Cholesky factor of ``A^T diag(d) A``, obtained from a QR factorization.

    ``scaled`` holds ``diag(sqrt(d)) A``; the triangular factor of its QR
    decomposition (with a positive diagonal) is the Cholesky factor of the
    normal matrix, computed without squaring the condition number.  A pivot
    below ``pivot_floor`` times its column norm counts as rank loss.
    """

    def __init__(self, A: np.ndarray, d: np.ndarray, pivot_floor: float = PIVOT_FLOOR):
        m = A.shape[0]
        d = _check_diag(d, m)
        self.A = A
        self.d = d
        self.scaled = A * np.sqrt(d)[:, None]
        if not np.all(np.isfinite(self.scaled)):
            raise NonFinite("scaled matrix overflowed")
        R = np.linalg.qr(self.scaled[graded_order(self.scaled)], mode="r")
        signs = np.where(np.diag(R) < 0, -1.0, 1.0)
        R = R * signs[:, None]
        if np.any(np.diag(R) <= pivot_floor * np.linalg.norm(R, axis=0)):
            raise RankDeficient("triangular pivot below floor")
        self.L = np.ascontiguousarray(R.T)
        box = _factor_count.get()
        if box is not None:
            box[0] += 1

    @property
    def matrix(self) -> np.ndarray:
        return self.scaled.T @ self.scaled

    def half_solve(self, rhs: np.ndarray) -> np.ndarray:
        """Return ``L^{-1} rhs``."""
        return solve_triangular(self.L, rhs, lower=True, check_finite=False)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        y = self.half_solve(rhs)
        return solve_triangular(self.L, y, lower=True, trans="T", check_finite=False)

    def logdet(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self.L))))

    def leverage_scores(self) -> np.ndarray:
        # columns of L^{-1} (sqrt(d) A)^T; squared norms are the diagonal of P
        Y = self.half_solve(self.scaled.T)
        return np.einsum("ij,ij->j", Y, Y)

    def projection(self) -> np.ndarray:
        """Dense m x m projection matrix; only for small instances."""
        Y = self.half_solve(self.scaled.T)
        return Y.T @ Y


def solve_normal_equations(
    A: np.ndarray,
    d: np.ndarray,
    rhs: np.ndarray,
    tol: SolveTolerance | None = None,
    pivot_floor: float = PIVOT_FLOOR,
) -> np.ndarray:
    """Solve ``(A^T D A) y = rhs`` with optional iterative refinement."""
    tol = tol or SolveTolerance()
    rhs = np.asarray(rhs, dtype=float)
    if not np.all(np.isfinite(rhs)) or not np.all(np.isfinite(A)):
        raise NonFinite("non-finite input to normal-equation solve")
    factor = NormalFactor(A, d, pivot_floor)
    y = factor.solve(rhs)
    rhs_norm = np.linalg.norm(rhs)
    for _ in range(tol.max_refinement_steps):
        resid = rhs - factor.matrix @ y
        if np.linalg.norm(resid) <= tol.relative_accuracy * rhs_norm * 1e-3:
            break
        y = y + factor.solve(resid)
    return y


def exact_leverage_scores(A: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Diagonal of ``X^{1/2} A (A^T X A)^{-1} A^T X^{1/2}``."""
    return NormalFactor(A, x).leverage_scores()


def jl_dimension(m: int, eps: float, constant: float = 24.0) -> int:
    """Number of Rademacher vectors for multiplicative accuracy ``eps``."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    return int(math.ceil(constant * math.log(m) / eps**2))


def sketched_scores(factor: NormalFactor, k: int, rng: np.random.Generator) -> np.ndarray:
    m = factor.A.shape[0]
    Q = rng.choice((-1.0, 1.0), size=(m, k)) / math.sqrt(k)
    # P q = S A M^{-1} A^T S q, with S = sqrt(d) folded into `scaled`
    Pq = factor.scaled @ factor.solve(factor.scaled.T @ Q)
    return np.einsum("ij,ij->i", Pq, Pq)


def approx_leverage_scores(
    A: np.ndarray,
    x: np.ndarray,
    eps: float,
    rng: np.random.Generator,
    constant: float = 24.0,
) -> np.ndarray:
    """Leverage scores estimated with a Rademacher sketch of the projection."""
    k = jl_dimension(A.shape[0], eps, constant)
    return sketched_scores(NormalFactor(A, x), k, rng)


def slack_sensitivity(
    A: np.ndarray,
    s: np.ndarray,
    w: np.ndarray,
    sketch_eps: float | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """Largest relative slack change a unit Newton step can cause.

    With ``sketch_eps`` set the leverage scores come from the sketch,
    otherwise they are exact.
    """
    As = A / s[:, None]
    if sketch_eps is None:
        sigma = exact_leverage_scores(As, w)
    else:
        if rng is None:
            raise ValueError("sketched slack sensitivity needs a random source")
        sigma = approx_leverage_scores(As, w, sketch_eps, rng)
    return float(np.sqrt(np.max(sigma / w)))
