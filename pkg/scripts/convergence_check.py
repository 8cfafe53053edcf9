"""Empirical check of the C/t bound on running-average error.

Draws random nondegenerate strategy pairs, computes each pair's
constant C, and compares the simulated mean squared error of the
running average at several horizons against C/t.  The ratio column
should stay below 1.
"""

import argparse
import sys

import numpy as np

from zdlab.games import canonical_game
from zdlab.markov import StrategyVector, convergence_constant, expected_payoffs
from zdlab.simulate import batch_average

TICKS = (10, 100, 1000)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pairs", type=int, default=10)
    parser.add_argument("--games", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=55)
    args = parser.parse_args(argv)

    pd = canonical_game("pd")
    rng = np.random.default_rng(args.seed)
    print("pair  eps      C        " +
          "  ".join(f"mse@{t}/bound" for t in TICKS))
    for i in range(args.pairs):
        x = StrategyVector(tuple(rng.uniform(0.05, 0.95, size=4)))
        y = StrategyVector(tuple(rng.uniform(0.05, 0.95, size=4)))
        bound = convergence_constant(x, y, pd.s_hat)
        ref = expected_payoffs(x, y, pd)
        stats = batch_average(x, y, pd, max(TICKS), args.games,
                              seed=args.seed + 1000 + i)
        mse = stats.mse_x(ref.x)
        ratios = [mse[t - 1] / (bound.constant / t) for t in TICKS]
        print(f"{i:>4}  {bound.epsilon:.4f}  {bound.constant:8.1f}  " +
              "  ".join(f"{r:12.4f}" for r in ratios))
    return 0


if __name__ == "__main__":
    sys.exit(main())
