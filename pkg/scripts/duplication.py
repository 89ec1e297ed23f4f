"""Iteration counts before and after repeating every constraint k times.

    python scripts/duplication.py --copies 10 --seeds 10 --rows 12 --cols 3
"""

import argparse
import csv
import sys

import numpy as np

from weighted_lp import instances
from weighted_lp.lp_driver import solve


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--copies", type=int, default=10)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--rows", type=int, default=12)
    ap.add_argument("--cols", type=int, default=3)
    ap.add_argument("--tol", type=float, default=1e-8)
    args = ap.parse_args()

    out = csv.writer(sys.stdout)
    out.writerow(["seed", "iterations", "iterations_duplicated", "ratio", "objective_gap"])
    for seed in range(args.seeds):
        lp = instances.bounded_feasible(np.random.default_rng(1100 + seed), args.rows, args.cols)
        base = solve(lp, args.tol, "tolerance", rng=seed)
        dup = solve(instances.duplicate_rows(lp, args.copies), args.tol, "tolerance", rng=seed)
        gap = abs(dup.objective - base.objective) if base.objective is not None and dup.objective is not None else ""
        out.writerow([seed, base.iterations, dup.iterations, f"{dup.iterations / base.iterations:.4f}", gap])
        sys.stdout.flush()


if __name__ == "__main__":
    main()
