"""Dataclass configurations for the weight function, centering and the path loop."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class WeightConfig:
    alpha: float
    beta: float
    c_r: float
    c_gamma: float
    c_1: float
    K: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.beta <= 0.0:
            raise ValueError("beta must be positive")
        if self.c_r < 1.0 or self.c_gamma < 1.0:
            raise ValueError("c_r and c_gamma must be at least 1")
        if self.K <= 0.0:
            raise ValueError("K must be positive")

    @classmethod
    def from_shape(cls, m: int, n: int) -> "WeightConfig":
        if m < n or n < 1:
            raise ValueError(f"bad shape {m}x{n}")
        # 2m/n >= 2 always; the log is then >= 1, but equals 1 when m == n,
        # which would put alpha at 0; nudge to keep alpha inside (0, 1)
        lg = max(math.log2(2.0 * m / n), 1.0 + 1e-9)
        c_r = 2.0 * lg
        return cls(
            alpha=1.0 - 1.0 / lg,
            beta=n / (2.0 * m),
            c_r=c_r,
            c_gamma=2.0,
            c_1=2.0 * n,
            K=1.0 / (24.0 * c_r),
        )

    def with_beta(self, beta: float) -> "WeightConfig":
        # used by the beta homotopy, where beta may exceed 1 temporarily
        return WeightConfig(self.alpha, beta, self.c_r, self.c_gamma, self.c_1, self.K)

    @property
    def box_radius(self) -> float:
        """Relative half-width of the trust box used by the weight iterations."""
        return 1.0 / (12.0 * self.c_r)


@dataclass(frozen=True)
class CenteringConfig:
    K: float
    R: float
    eps_game: float
    mu: float
    delta_target: float
    phi_budget: float

    @classmethod
    def build(
        cls,
        wcfg: WeightConfig,
        m: int,
        strict: bool = False,
        tracking_budget: float = 0.5,
    ) -> "CenteringConfig":
        """Strict constants follow the analysis; practical ones are sized for desk runs.

        Practical mode keeps the relations between the constants (the
        observation radius equals the largest per-step move, ``mu = eps /
        (12 R)``) but anchors them at the r-step stability threshold
        ``delta <= 1/(8 c_gamma)`` instead of the analysis threshold, and
        audits the weight tracking error against ``tracking_budget``.
        """
        c_r, c_g, K = wcfg.c_r, wcfg.c_gamma, wcfg.K
        log_term = math.log(960.0 * c_r * c_g * m**1.5)
        eps_game = 1.0 / (5.0 * c_r)
        phi_budget = 960.0 * c_r * c_g * m**1.5
        if strict:
            R = K / (60.0 * c_r * log_term)
            delta_target = K / (240.0 * c_r * c_g * log_term)
            budget = K
        else:
            delta_target = 1.0 / (8.0 * c_g)
            R = 4.0 * c_g * delta_target
            budget = tracking_budget
        return cls(
            K=budget,
            R=R,
            eps_game=eps_game,
            mu=eps_game / (12.0 * R),
            delta_target=delta_target,
            phi_budget=phi_budget,
        )


@dataclass
class PathConfig:
    """Knobs of the path-following loop."""

    theta: float = 0.005
    strict_constants: bool = False
    audit_period: int | None = None  # None: derived from m
    max_iters: int = 2_000_000
    max_consecutive_rollbacks: int = 3
    growth_recovery: float = 1.25  # per passed audit, after a rollback halved the growth
    weight_oracle: str = "tracking"  # "tracking", "newton" or "sketch"
    tracking_rounds: int = 1  # averaging rounds per step for the tracking oracle
    # relative half-width of the per-step clamp on the tracked weight; the
    # sketched oracle needs the narrow 1/(12 c_r) box, exact scores do not
    tracking_box: float = 0.5
    weight_move: str = "projection"  # or "potential"; strict mode always uses "potential"
    clip_moves: bool = True  # never move log w past the observed log g (practical mode only)
    step_gamma_bound: float | None = None  # None: exact value from the Hessian factor
    trace: list | None = field(default=None, repr=False)

    @property
    def projects_moves(self) -> bool:
        return self.weight_move == "projection" and not self.strict_constants

    @property
    def clips_moves(self) -> bool:
        return self.clip_moves and not self.strict_constants

    def growth(self, n: int, wcfg: WeightConfig, m: int) -> float:
        if self.strict_constants:
            c_r = wcfg.c_r
            return 1.0 / (1e10 * c_r**3 * math.log(c_r * m) * math.sqrt(n))
        return self.theta / math.sqrt(n)

    def period(self, m: int, wcfg: WeightConfig) -> int:
        if self.audit_period is not None:
            return max(1, self.audit_period)
        if not self.strict_constants and self.weight_oracle == "tracking":
            # audits need an exact weight solve; amortize them
            return 25
        c_r = wcfg.c_r
        return max(1, math.ceil(m / (100.0 * c_r * math.log(c_r * m))))
