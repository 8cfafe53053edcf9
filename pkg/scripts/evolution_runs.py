"""Replicator contests between a PD extortioner and its usual rivals.

Two runs: against all-up the invading extortioner settles at the
closed-form share omega; against tit-for-tat its share never grows.
Writes one trajectory CSV per contest and prints the endpoints.
"""

import argparse
import sys
from pathlib import Path

from zdlab.evolution import (Population, payoff_table, replicator_trajectory,
                             stable_share_omega, trajectory_to_csv)
from zdlab.games import canonical_game
from zdlab.markov import StrategyVector, tit_for_tat
from zdlab.zd import synth_extortion


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dt", type=float, default=0.01)
    parser.add_argument("--steps", type=int, default=60000)
    parser.add_argument("--zd-share", type=float, default=0.01)
    parser.add_argument("--out-dir", default="results")
    args = parser.parse_args(argv)

    pd = canonical_game("pd")
    ext = synth_extortion(pd, chi=10.0, delta=1.0, phi=0.02)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    contests = {
        "zd_vs_allu": StrategyVector((1, 1, 1, 1), 1.0),
        "zd_vs_tft": tit_for_tat(),
    }
    for name, rival in contests.items():
        rival_name = name.split("_vs_")[1]
        pop = Population(("zd", rival_name), (ext, rival),
                         (args.zd_share, 1 - args.zd_share))
        table = payoff_table(pop.vectors, pd)
        trajectory = replicator_trajectory(pop, table, dt=args.dt,
                                           steps=args.steps)
        with open(out_dir / f"{name}.csv", "w") as fh:
            trajectory_to_csv(trajectory, pop.names, fh)
        line = f"{name}: final zd share {trajectory[-1, 0]:.6f}"
        omega = stable_share_omega(table)
        if omega is not None:
            line += f"  (fixed point {omega:.6f})"
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
