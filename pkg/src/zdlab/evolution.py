"""Evolutionary contests between memory-one strategies.

Pairwise payoff tables come from the exact expected payoffs; population
shares then follow replicator dynamics.  For a single invader against an
incumbent the stable interior share has a closed form, used to
cross-check the integrated trajectories.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from zdlab.games import StageGame
from zdlab.markov import StrategyVector, expected_payoffs

# start-dependent self-play entries are averaged from an even mix of outcomes
UNIFORM_START = (0.25, 0.25, 0.25, 0.25)


@dataclass(frozen=True)
class Population:
    """Named strategies with their current shares."""

    names: tuple[str, ...]
    vectors: tuple[StrategyVector, ...]
    shares: tuple[float, ...]

    def __post_init__(self):
        if not (len(self.names) == len(self.vectors) == len(self.shares)):
            raise ValueError("names, vectors and shares must align")
        if any(s < 0 for s in self.shares):
            raise ValueError("shares must be nonnegative")
        if abs(sum(self.shares) - 1.0) > 1e-12:
            raise ValueError(f"shares must sum to 1, got {sum(self.shares)!r}")


@dataclass(frozen=True)
class PayoffTable:
    """u[i, j]: expected average payoff of strategy i in the X seat against j."""

    u: np.ndarray
    start_dependent: np.ndarray


def payoff_table(vectors, game: StageGame) -> PayoffTable:
    """Fill the pairwise payoff matrix for a strategy pool.

    Start-dependent pairs (reducible chains, tit-for-tat against itself
    being the usual case) are evaluated from the uniform opening mix and
    flagged.
    """
    n = len(vectors)
    u = np.empty((n, n))
    flagged = np.zeros((n, n), dtype=bool)
    for i, vi in enumerate(vectors):
        for j, vj in enumerate(vectors):
            result = expected_payoffs(vi, vj, game, mu1=UNIFORM_START)
            u[i, j] = result.x
            flagged[i, j] = result.start_dependent
    return PayoffTable(u=u, start_dependent=flagged)


def replicator_step(shares: np.ndarray, u: np.ndarray, dt: float) -> np.ndarray:
    fitness = u @ shares
    mean = float(shares @ fitness)
    nxt = shares * (1.0 + dt * (fitness - mean))
    nxt = np.clip(nxt, 0.0, None)
    return nxt / nxt.sum()


def replicator_trajectory(pop: Population, table: PayoffTable, dt: float = 0.01,
                          steps: int = 1000) -> np.ndarray:
    """Explicit-Euler shares over time; row t is the mix after t steps."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    shares = np.asarray(pop.shares, dtype=float)
    out = np.empty((steps + 1, len(shares)))
    out[0] = shares
    for t in range(1, steps + 1):
        shares = replicator_step(shares, table.u, dt)
        out[t] = shares
    return out


def stable_share_omega(table: PayoffTable) -> float | None:
    """Closed-form stable share of the invader (row 0) against an incumbent.

    omega = (u01 - u11) / (u01 - u11 + u10 - u00).  A zero numerator is
    the no-advantage boundary (share 0); a nonpositive denominator or a
    share outside the unit interval means no stable interior mix exists.
    """
    if table.u.shape != (2, 2):
        raise ValueError("the closed form needs exactly two strategies")
    (u00, u01), (u10, u11) = table.u
    numerator = u01 - u11
    if numerator == 0:
        return 0.0
    if numerator < 0:
        return None
    denominator = numerator + u10 - u00
    if denominator <= 0:
        return None
    omega = numerator / denominator
    if not 0.0 < omega < 1.0:
        return None
    return omega


def trajectory_to_csv(trajectory: np.ndarray, names, stream) -> None:
    writer = csv.writer(stream)
    writer.writerow(["step"] + [f"share_{name}" for name in names])
    for t, row in enumerate(trajectory):
        writer.writerow([t] + [float(v) for v in row])
