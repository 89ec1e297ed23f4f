"""Path iterations against the number of variables at a fixed row ratio.

Solves seeded random bounded programs with m = ratio * n rows and prints one
CSV row per solve, then the log-log regression slope of mean iterations on n.

    python scripts/iteration_scaling.py --sizes 2 4 8 16 --seeds 10
"""

import argparse
import csv
import sys

import numpy as np

from weighted_lp import instances
from weighted_lp.lp_driver import solve


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[2, 4, 8, 16])
    ap.add_argument("--ratio", type=int, default=8)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--tol", type=float, default=1e-8)
    args = ap.parse_args()

    out = csv.writer(sys.stdout)
    out.writerow(["n", "m", "seed", "status", "iterations", "rollbacks", "wall_ms"])
    means = []
    for n in args.sizes:
        counts = []
        for seed in range(args.seeds):
            lp = instances.bounded_feasible(np.random.default_rng(1000 * n + seed), args.ratio * n, n)
            rep = solve(lp, args.tol, "tolerance", rng=seed)
            counts.append(rep.iterations)
            out.writerow([n, args.ratio * n, seed, rep.status, rep.iterations, rep.rollbacks, round(rep.wall_time)])
            sys.stdout.flush()
        means.append(np.mean(counts))
    if len(args.sizes) > 1:
        slope = np.polyfit(np.log(args.sizes), np.log(means), 1)[0]
        print(f"# log-log slope of mean iterations on n: {slope:.3f}", file=sys.stderr)


if __name__ == "__main__":
    main()
