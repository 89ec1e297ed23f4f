"""Play the chasing-0 game against a random drifting adversary and write the trace.

The CSV has columns round, potential, max_abs.  The caps implied by the
move sets are printed to stderr.

    python scripts/chasing_zero_trace.py --size 16 --rounds 1000 --out game.csv
"""

import argparse
import math
import sys

import numpy as np

from weighted_lp.smoothing import GameRound, MoveSet, PotentialConfig, play_chasing_zero


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=16)
    ap.add_argument("--rounds", type=int, default=1000)
    ap.add_argument("--eps", type=float, default=0.1)
    ap.add_argument("--noise", type=float, default=0.5, help="max-norm bound R of the observation error")
    ap.add_argument("--seed", type=int, default=8)
    ap.add_argument("--out", default="chasing_zero.csv")
    args = ap.parse_args()

    m, R = args.size, args.noise
    rng = np.random.default_rng(args.seed)
    sets = [MoveSet(1.0, R, rng.uniform(0.1, 1.0, m)) for _ in range(args.rounds)]
    inner = [min(U.inf_norm_bound, U.weight_norm_bound / math.sqrt(U.w.sum())) for U in sets]
    outer = [min(U.inf_norm_bound, float(np.max(U.weight_norm_bound / np.sqrt(U.w)))) for U in sets]
    tau = max(o / i for i, o in zip(inner, outer))
    cfg = PotentialConfig.for_radius(R, args.eps)
    x0 = (12 * R / args.eps) * math.log(6 * tau / args.eps) * rng.choice([-1.0, 1.0], m)

    def adversary(k, x):
        U = sets[k]
        u = np.clip((np.sign(x) + 0.5 * rng.standard_normal(m)) * U.inf_norm_bound, -U.inf_norm_bound, U.inf_norm_bound)
        u *= min(1.0, U.weight_norm_bound / math.sqrt(float(np.sum(U.w * u * u))))
        return GameRound(U, u * rng.uniform(0.5, 1.0), rng.uniform(-R, R, m))

    traj = play_chasing_zero(adversary, args.rounds, cfg, x0)
    traj.write_csv(args.out)
    cap = 12 * m * tau / args.eps
    print(
        f"max potential {max(traj.potentials):.1f} (cap {cap:.1f}); "
        f"max |x| {max(traj.max_abs):.1f} (cap {(12 * R / args.eps) * math.log(cap):.1f}); "
        f"overflowed {traj.overflowed}",
        file=sys.stderr,
    )


if __name__ == "__main__":
    main()
