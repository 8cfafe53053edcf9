"""Batch reproduction of the chicken-game simulation points.

Runs the four headline pairings (mischief and extortion against the
randomizer, extortion against tit-for-tat and all-down) plus the
modified-PD retaliation point, writes one trajectory CSV per pairing,
and prints the final means next to their reference values.

Full scale (10000 games x 7000 rounds) takes a few seconds per pairing;
use --games/--iterations to downscale for a smoke run.
"""

import argparse
import sys
from pathlib import Path

from zdlab.games import canonical_game, prisoners_dilemma
from zdlab.markov import StrategyVector, expected_payoffs, randomizer, tit_for_tat
from zdlab.simulate import batch_average, write_batch_csv
from zdlab.zd import synth_extortion, synth_mischief

REFERENCES = {
    "mischief_vs_randomizer": (3.64, 2.50),
    "extortion_vs_randomizer": (3.61, 2.16),
    "extortion_vs_tft": (2.00, 2.00),
    "extortion_vs_alld": (0.53, 1.85),
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--games", type=int, default=10000)
    parser.add_argument("--iterations", type=int, default=7000)
    parser.add_argument("--seed", type=int, default=101)
    parser.add_argument("--out-dir", default="results")
    args = parser.parse_args(argv)

    gc = canonical_game("gc")
    ext = synth_extortion(gc, chi=10.0, delta=2.0, phi=0.02)
    pairings = {
        "mischief_vs_randomizer": (synth_mischief(gc, 2.5, -0.1),
                                   randomizer(0.5)),
        "extortion_vs_randomizer": (ext, randomizer(0.5)),
        "extortion_vs_tft": (ext, tit_for_tat()),
        "extortion_vs_alld": (ext, StrategyVector((0, 0, 0, 0), 0.0)),
    }

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, (name, (x, y)) in enumerate(pairings.items()):
        stats = batch_average(x, y, gc, args.iterations, args.games,
                              seed=args.seed + i)
        with open(out_dir / f"{name}.csv", "w") as fh:
            write_batch_csv(stats, fh)
        rx, ry = REFERENCES[name]
        print(f"{name}: ({stats.final_x:.4f}, {stats.final_y:.4f})"
              f"  reference ({rx:.2f}, {ry:.2f})"
              f"  se ({stats.se_final_x():.4f}, {stats.se_final_y():.4f})")

    modpd = prisoners_dilemma(10, 0, 11, 9, name="modpd")
    vec = synth_extortion(modpd, chi=10.0, delta=9.0, phi=0.01)
    result = expected_payoffs(vec, randomizer(0.5), modpd)
    print(f"modpd_extortion_vs_randomizer: ({result.x:.4f}, {result.y:.4f})"
          "  reference (6.46, 8.75)  [exact]")
    return 0


if __name__ == "__main__":
    sys.exit(main())
