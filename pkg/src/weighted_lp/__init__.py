"""Weighted path-following interior point solver for dense linear programs."""

from .config import CenteringConfig, PathConfig, WeightConfig
from .errors import SolverError
from .lp_driver import DriverConfig, RawLP, SolveReport, preprocess, round_to_active_set, solve

__all__ = [
    "CenteringConfig",
    "DriverConfig",
    "PathConfig",
    "RawLP",
    "SolveReport",
    "SolverError",
    "WeightConfig",
    "preprocess",
    "round_to_active_set",
    "solve",
]
