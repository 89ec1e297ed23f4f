"""End-to-end LP solving: reduction, initialization, path following, rounding.

The input program ``min c^T x s.t. A x >= b`` is embedded in a bounded
program with one extra variable ``z`` that relaxes every constraint:

    min  c^T x + P z
    s.t. A x + z 1 >= b,   -B <= x_j <= B,   0 <= z <= B

which has the explicit interior point ``x = 0`` with ``z`` large enough.
The original program is infeasible exactly when the relaxation needs
``z > 0`` (for a large enough penalty ``P``), and unbounded exactly when
the optimum sits on the artificial box.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .central_path import (
    PathStats,
    Polytope,
    Stepper,
    WeightedIterate,
    centrality,
    path_following,
)
from .config import CenteringConfig, PathConfig, WeightConfig
from .errors import (
    AmbiguousActiveSet,
    DimensionMismatch,
    InitializationFailure,
    IterationLimit,
    NonFinite,
    Overflow,
    SolverError,
)
from .linalg import start_counting
from .weights import compute_initial_weight, newton_weight

log = logging.getLogger(__name__)

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"
ITERATION_LIMIT = "IterationLimit"
NUMERICAL_FAILURE = "NumericalFailure"

# integral mode gives up on exact penalties beyond this exponent
MAX_PENALTY_EXPONENT = 200


@dataclass
class RawLP:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    integrality: bool = False

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        m, n = self.A.shape
        if m == 0 or n == 0:
            raise DimensionMismatch("constraint matrix is empty")
        if self.b.size != m:
            raise DimensionMismatch(f"b has {self.b.size} entries, A has {m} rows")
        if self.c.size != n:
            raise DimensionMismatch(f"c has {self.c.size} entries, A has {n} columns")
        for name, arr in (("A", self.A), ("b", self.b), ("c", self.c)):
            if not np.all(np.isfinite(arr)):
                raise NonFinite(f"{name} has non-finite entries")
        if self.integrality and not all(
            np.array_equal(arr, np.round(arr)) for arr in (self.A, self.b, self.c)
        ):
            raise ValueError("integrality flag set on non-integer data")

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape


def bit_size(lp: RawLP) -> int:
    """``ceil(log2 m + log2(1 + d))`` with ``d`` Hadamard's bound on subdeterminants.

    Any square submatrix of ``[A b; c^T 0]`` has determinant at most the
    product of its row norms, and those are at most the full row norms;
    rows of norm below one only shrink the product.
    """
    m, n = lp.shape
    full = np.zeros((m + 1, n + 1))
    full[:m, :n] = lp.A
    full[:m, n] = lp.b
    full[m, :n] = lp.c
    norms = np.sort(np.linalg.norm(full, axis=1))[::-1][: n + 1]
    log_d = float(np.sum(np.log2(np.maximum(norms, 1.0))))
    # log2(1 + d) <= log_d + 1 for d >= 1
    return int(math.ceil(math.log2(max(m, 2)) + log_d + 1.0))


@dataclass
class PreprocessedLP:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    L: int
    interior_point: np.ndarray
    provenance: list[tuple]
    box: float
    penalty: float
    cost_scale: float
    n_original: int
    integral: bool

    def __post_init__(self):
        s = self.A @ self.interior_point - self.b
        if not np.all(s > 0):
            raise ValueError("interior point is not strictly feasible")

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]


@dataclass
class DriverConfig:
    """Sizing of the reduction and the termination rule."""

    tolerance: float = 1e-8
    mode: str = "tolerance"  # or "integral"
    # tolerance mode: first artificial box radius, then the largest one tried
    box_cap: float = 1e4
    box_cap_max: float = 1e9
    # tolerance mode: penalties on z tried in turn, relative to the normalized cost
    penalties: tuple[float, ...] = (1e3, 1e6)
    # floor for the decrease phase, relative to the default 2^-20 / scale
    t_small: float | None = None
    max_halvings: int = 6
    perturb: bool = True
    zero_perturbation: bool = False  # test hook: r = 0


def preprocess(
    lp: RawLP,
    mode: str = "tolerance",
    box: float | None = None,
    penalty: float | None = None,
    box_cap: float = 1e4,
) -> PreprocessedLP:
    """Bounded, feasible relaxation with an explicit interior point.

    Rows of the result, in order: the ``m`` relaxed constraints, ``n``
    lower bounds, ``n`` upper bounds, ``z >= 0`` and ``z <= B``.  Integral
    mode uses ``B = 2^(L+1)``, the penalty ``n 2^(3L+4)`` and the start
    ``z = 2^L + 1``.  Tolerance mode normalizes the cost to unit max norm,
    caps the box at ``box_cap`` and starts from the smallest ``z`` that
    leaves every relaxed constraint with slack at least one.
    """
    m, n = lp.shape
    L = bit_size(lp)
    integral = mode == "integral"
    if integral:
        if 3 * L + 4 > MAX_PENALTY_EXPONENT:
            raise Overflow(f"bit size L={L} is beyond the float-safe range for exact penalties")
        scale = 1.0
        B = box if box is not None else 2.0 ** (L + 1)
        P = penalty if penalty is not None else n * 2.0 ** (3 * L + 4)
        z0 = 2.0**L + 1.0
    else:
        scale = max(float(np.max(np.abs(lp.c))), 1e-300)
        B = box if box is not None else min(2.0 ** (L + 1), box_cap)
        P = penalty if penalty is not None else 1e3
        z0 = max(float(np.max(lp.b)), 0.0) + 1.0
    B = max(B, 2.0 * z0)
    A = np.zeros((m + 2 * n + 2, n + 1))
    A[:m, :n] = lp.A
    A[:m, n] = 1.0
    A[m : m + n, :n] = np.eye(n)
    A[m + n : m + 2 * n, :n] = -np.eye(n)
    A[m + 2 * n, n] = 1.0
    A[m + 2 * n + 1, n] = -1.0
    b = np.concatenate([lp.b, np.full(2 * n, -B), [0.0, -B]])
    c = np.concatenate([lp.c / scale, [P]])
    provenance = (
        [("constraint", i) for i in range(m)]
        + [("lower", j) for j in range(n)]
        + [("upper", j) for j in range(n)]
        + [("aux_lower",), ("aux_upper",)]
    )
    x0 = np.zeros(n + 1)
    x0[n] = z0
    return PreprocessedLP(A, b, c, L, x0, provenance, B, P, scale, n, integral)


def perturb_cost(
    pre: PreprocessedLP, rng: np.random.Generator, zero: bool = False
) -> PreprocessedLP:
    """Scale the cost by ``2^(2L+3) n`` and add integers uniform in ``[-2^(L+1) n, 2^(L+1) n]``.

    Only the original variables are perturbed; the penalty on ``z`` is kept.
    ``zero`` forces the perturbation to vanish, keeping the scaling.
    """
    if not pre.integral:
        return pre
    n, L = pre.n_original, pre.L
    bound = int(2 ** (L + 1) * n)
    r = np.zeros(n) if zero else rng.integers(-bound, bound + 1, size=n).astype(float)
    c = pre.c.copy()
    c[:n] = 2.0 ** (2 * L + 3) * n * c[:n] + r
    # the penalty must keep dominating the scaled cost
    c[n] = pre.penalty * 2.0 ** (2 * L + 3) * n
    return PreprocessedLP(
        pre.A, pre.b, c, L, pre.interior_point, pre.provenance, pre.box,
        c[n], pre.cost_scale, n, True,
    )


@dataclass
class SolveReport:
    status: str
    x_star: list[float] | None
    objective: float | None
    active_set: list[int]
    iterations: int
    linear_solves: int
    audits: int
    rollbacks: int
    duality_gap_bound: float
    mode: str = "tolerance"
    active_bounds: list[str] = field(default_factory=list)
    aux_value: float | None = None
    notes: list[str] = field(default_factory=list)
    wall_time: float = 0.0  # milliseconds

    def to_dict(self) -> dict:
        return asdict(self)


def _weight_config(pre: PreprocessedLP) -> WeightConfig:
    return WeightConfig.from_shape(pre.m, pre.n)


def initialize(
    pre: PreprocessedLP,
    pcfg: PathConfig,
    ccfg: CenteringConfig,
    rng: np.random.Generator,
    stats: PathStats,
    t_small: float | None = None,
    max_halvings: int = 6,
) -> tuple[WeightedIterate, Stepper]:
    """Centered iterate for the true cost at a small path parameter.

    At the interior point the cost ``A^T S^-1 w0`` makes the point exactly
    central at ``t = 1``.  Following that path toward small ``t`` shrinks
    the cost's influence until swapping in the true cost keeps the point
    near-central; the decrease stops as soon as the swapped centrality
    would be below half the limit, or at ``t_small``.
    """
    wcfg = _weight_config(pre)
    poly = Polytope(pre.A, pre.b)
    x0 = pre.interior_point
    s0 = poly.slacks(x0)
    if pcfg.strict_constants:
        w0 = compute_initial_weight(pre.A, s0, wcfg.K, wcfg, rng)
    else:
        w0 = newton_weight(pre.A, s0, None, wcfg)
    c_mod = pre.A.T @ (w0 / s0)
    it = WeightedIterate.at(poly, x0, w0, 1.0)
    limit = ccfg.delta_target
    if t_small is None:
        # scale of the true cost seen from the starting point
        t_small = 2.0**-20 / max(1.0, float(np.max(np.abs(pre.c))) * float(np.max(s0)))

    def swap_ready(cur: WeightedIterate, rep) -> bool:
        return centrality(poly, cur, pre.c) <= limit / 2

    stepper = Stepper(poly, c_mod, wcfg, ccfg, pcfg)
    for _ in range(max_halvings + 1):
        it = path_following(
            poly, it, c_mod, t_small, wcfg, ccfg, pcfg, rng, stats, stop=swap_ready, stepper=stepper
        )
        if centrality(poly, it, pre.c) <= limit:
            main = Stepper(poly, pre.c, wcfg, ccfg, pcfg)
            main.latest_weight, main.latest_slacks = stepper.latest_weight, stepper.latest_slacks
            main.solves = stepper.solves
            return it, main
        log.debug("cost swap failed at t=%.3e; halving", it.t)
        t_small /= 2.0
    raise InitializationFailure(f"cost swap still off-center after {max_halvings} halvings")


def aux_lower_bound(pre: PreprocessedLP, it: WeightedIterate) -> float:
    """Certified lower bound on the least feasible value of the relaxation variable.

    Let ``z_min`` be attained at ``x_min`` inside the box.  The penalized
    optimum is at most ``c^T x_min + P z_min <= ||c||_1 B + P z_min`` over
    the original variables, and at least the path value minus the gap
    bound, taken twice over to cover an iterate that is only near-central.
    """
    n = pre.n_original
    gap = 2.0 * float(np.sum(it.w)) / it.t
    value = float(pre.c @ it.x)
    reach = float(np.sum(np.abs(pre.c[:n]))) * pre.box
    return (value - gap - reach) / float(pre.c[n])


def _target_t(pre: PreprocessedLP, wcfg: WeightConfig, tolerance: float, scale: float) -> float:
    w_total = pre.n + wcfg.beta * pre.m
    return w_total / (tolerance * scale)


def round_to_active_set(
    pre: PreprocessedLP, x_near: np.ndarray, threshold: float
) -> tuple[list[int], np.ndarray]:
    """Rows with slack below ``threshold`` and the least-squares point on them.

    Raises ``AmbiguousActiveSet`` when the flagged rows do not pin down a
    point; the caller then keeps ``x_near``.
    """
    s = pre.A @ x_near - pre.b
    rows = np.flatnonzero(s < threshold)
    if rows.size == 0:
        raise AmbiguousActiveSet("no active rows")
    sub = pre.A[rows]
    if np.linalg.matrix_rank(sub) < pre.n:
        raise AmbiguousActiveSet(f"{rows.size} active rows have rank below {pre.n}")
    x, *_ = np.linalg.lstsq(sub, pre.b[rows], rcond=None)
    return rows.tolist(), x


def _split_rows(pre: PreprocessedLP, rows: list[int]) -> tuple[list[int], list[str]]:
    constraints, bounds = [], []
    for r in rows:
        tag = pre.provenance[r]
        if tag[0] == "constraint":
            constraints.append(int(tag[1]))
        else:
            bounds.append(":".join(str(p) for p in tag))
    return constraints, bounds


@dataclass
class _Outcome:
    it: WeightedIterate
    x: np.ndarray
    rows: list[int]
    ambiguous: bool
    gap: float
    certified_infeasible: bool = False


def _run(
    pre: PreprocessedLP,
    dcfg: DriverConfig,
    pcfg: PathConfig,
    rng: np.random.Generator,
    stats: PathStats,
    counter: dict,
) -> _Outcome:
    wcfg = _weight_config(pre)
    ccfg = CenteringConfig.build(wcfg, pre.m, strict=pcfg.strict_constants)
    poly = Polytope(pre.A, pre.b)
    it, stepper = initialize(pre, pcfg, ccfg, rng, stats, dcfg.t_small, dcfg.max_halvings)
    scale = 1.0 if not pre.integral else float(np.max(np.abs(pre.c[: pre.n_original]))) or 1.0
    t_end = max(_target_t(pre, wcfg, dcfg.tolerance, scale), it.t)
    stop = None
    if pre.integral:
        threshold = 2.0 ** (-pre.L - 1)

        def stop(cur: WeightedIterate, rep) -> bool:
            return aux_lower_bound(pre, cur) > threshold

    # the weights drift around the weight function, so the bound may need a little more t
    for _ in range(8):
        it = path_following(poly, it, pre.c, t_end, wcfg, ccfg, pcfg, rng, stats, stop=stop, stepper=stepper)
        gap = float(np.sum(it.w)) / (it.t * scale)
        if gap <= dcfg.tolerance or (stop is not None and stop(it, None)):
            break
        t_end *= 1.5 * gap / dcfg.tolerance
    counter["solves"] += stepper.solves
    if stop is not None and stop(it, None):
        # the relaxation variable is provably positive; no vertex to round to
        return _Outcome(it, it.x, [], False, gap, certified_infeasible=True)
    # scale by the original right-hand side; the box rows would inflate it
    b_scale = 1.0 + float(np.max(np.abs(pre.b[: pre.m - 2 * pre.n_original - 2])))
    if pre.integral:
        threshold = 2.0 ** (-pre.L - 1)
    else:
        threshold = math.sqrt(dcfg.tolerance) * b_scale
    try:
        rows, x = round_to_active_set(pre, it.x, threshold)
        ambiguous = False
        # keep the refined point only if it is (numerically) feasible
        viol = float(np.max(pre.b - pre.A @ x))
        if viol > 1e-9 * b_scale:
            x, ambiguous = it.x, True
    except AmbiguousActiveSet as exc:
        log.debug("rounding: %s", exc)
        s = pre.A @ it.x - pre.b
        rows = np.flatnonzero(s < threshold).tolist()
        x, ambiguous = it.x, True
    return _Outcome(it, x, rows, ambiguous, gap)


def solve(
    lp: RawLP,
    tolerance: float = 1e-8,
    mode: str = "tolerance",
    rng: np.random.Generator | int | None = 0,
    pcfg: PathConfig | None = None,
    dcfg: DriverConfig | None = None,
) -> SolveReport:
    """Solve ``min c^T x s.t. A x >= b`` and classify the outcome.

    Tolerance mode retries with a larger penalty when the relaxation
    variable stays positive, and with a larger box when the optimum sits
    on the artificial box, before declaring infeasibility or
    unboundedness.  Integral mode uses the exact reduction sizes and the
    randomized cost perturbation; it falls back to tolerance mode when the
    bit size is beyond float range.
    """
    start = time.perf_counter()
    rng = np.random.default_rng(rng)
    pcfg = pcfg if pcfg is not None else PathConfig()
    dcfg = dcfg if dcfg is not None else DriverConfig()
    dcfg = DriverConfig(**{**asdict(dcfg), "tolerance": tolerance, "mode": mode})
    notes: list[str] = []
    stats = PathStats()
    factor_count = start_counting()
    counter = {"solves": 0}
    n = lp.shape[1]

    def report(status: str, **kw) -> SolveReport:
        kw.setdefault("x_star", None)
        kw.setdefault("objective", None)
        kw.setdefault("active_set", [])
        kw.setdefault("duality_gap_bound", math.inf)
        return SolveReport(
            status=status,
            iterations=stats.iterations,
            linear_solves=counter["solves"] + factor_count[0],
            audits=stats.audits,
            rollbacks=stats.rollbacks,
            # the pipeline that produced the result, after any fallback
            mode="integral" if integral else "tolerance",
            notes=notes,
            wall_time=1e3 * (time.perf_counter() - start),
            **kw,
        )

    integral = mode == "integral"
    if integral and not lp.integrality:
        if not all(np.array_equal(a, np.round(a)) for a in (lp.A, lp.b, lp.c)):
            notes.append("integral mode needs integer data; using tolerance mode")
            integral = False
    try:
        if integral:
            try:
                pre = preprocess(lp, "integral")
            except Overflow as exc:
                notes.append(f"{exc}; using tolerance mode")
                integral = False
        if integral:
            if dcfg.perturb:
                pre = perturb_cost(pre, rng, zero=dcfg.zero_perturbation)
            try:
                out = _run(pre, dcfg, pcfg, rng, stats, counter)
                aux_threshold = 2.0 ** (-pre.L - 1)
                at_box = float(np.max(np.abs(out.x[:n]))) > 2.0**pre.L
            except IterationLimit:
                raise
            except SolverError as exc:
                # the exact penalty can pin z (and any implicit equality)
                # to near zero long before the cost is resolved, leaving the
                # weights beyond double precision; the tolerance pipeline
                # reaches such rows only together with the optimal vertex
                notes.append(f"integral pipeline failed ({type(exc).__name__}: {exc}); using tolerance mode")
                integral = False
        if not integral:
            boxes = [None, dcfg.box_cap_max]
            for bi, box in enumerate(boxes):
                for pi, penalty in enumerate(dcfg.penalties):
                    pre = preprocess(lp, "tolerance", box=box, penalty=penalty, box_cap=dcfg.box_cap)
                    out = _run(pre, dcfg, pcfg, rng, stats, counter)
                    aux_threshold = math.sqrt(tolerance) * (1.0 + float(np.max(np.abs(lp.b))))
                    if out.x[n] <= aux_threshold:
                        break
                    if pi + 1 < len(dcfg.penalties):
                        notes.append(f"auxiliary variable positive at penalty {penalty:g}; retrying")
                at_box = float(np.max(np.abs(out.x[:n]))) >= 0.5 * pre.box
                if out.x[n] > aux_threshold or not at_box:
                    break
                if bi + 1 < len(boxes) and pre.box < dcfg.box_cap_max:
                    notes.append(f"optimum on the artificial box of radius {pre.box:g}; retrying")
                else:
                    break
            if at_box:
                notes.append(f"unboundedness judged against an artificial box of radius {pre.box:g}")
    except IterationLimit as exc:
        notes.append(str(exc))
        return report(ITERATION_LIMIT)
    except SolverError as exc:
        notes.append(f"{type(exc).__name__}: {exc}")
        return report(NUMERICAL_FAILURE)

    x = out.x
    aux = float(x[n])
    constraints, bounds = _split_rows(pre, out.rows)
    if out.certified_infeasible:
        notes.append(f"relaxation variable certified positive at t={out.it.t:.3e}")
    if out.ambiguous:
        notes.append("active rows do not determine a unique vertex; reporting the interior iterate")
    common = dict(
        active_set=constraints,
        active_bounds=bounds,
        aux_value=aux,
        duality_gap_bound=out.gap,
    )
    if aux > aux_threshold:
        return report(INFEASIBLE, **common)
    if at_box:
        return report(UNBOUNDED, **common)
    x_star = x[:n]
    return report(
        OPTIMAL,
        x_star=[float(v) for v in x_star],
        objective=float(lp.c @ x_star),
        **common,
    )
