"""Monte Carlo play of iterated 2x2 games.

Single games run agents round by round; batches of memory-one pairs run
on a vectorised path that steps thousands of games at once.  Both paths
consume randomness identically (one uniform for X, then one for Y, per
round, from a per-game generator seeded off the master seed), so a game
simulated alone reproduces the same trajectory it had inside a batch.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from zdlab.agents import MemoryOneAgent, UP
from zdlab.games import OUTCOME_NAMES, StageGame
from zdlab.markov import StrategyVector

TRACE_SCHEMA = "zdlab.trace/1"
BATCH_SCHEMA = "zdlab.batch/1"

# checkpoints record running averages every round early on, then thin out
DENSE_CHECKPOINTS = 1000
THIN_STRIDE = 10

# games per vectorised chunk are capped so a chunk's uniforms stay ~128MB
_CHUNK_BUDGET = 8_000_000


def derive_seed(master_seed: int, index: int) -> int:
    """Stable per-game seed: game `index` of a batch always gets the same stream."""
    words = np.random.SeedSequence((int(master_seed), int(index))).generate_state(2, np.uint64)
    return (int(words[0]) << 64) | int(words[1])


def checkpoint_schedule(iterations: int) -> np.ndarray:
    """Rounds at which running averages are recorded; always ends at `iterations`."""
    if iterations < 1:
        raise ValueError("iterations must be positive")
    if iterations <= DENSE_CHECKPOINTS:
        return np.arange(1, iterations + 1)
    ticks = list(range(1, DENSE_CHECKPOINTS + 1))
    ticks += list(range(DENSE_CHECKPOINTS + THIN_STRIDE, iterations + 1, THIN_STRIDE))
    if ticks[-1] != iterations:
        ticks.append(iterations)
    return np.array(ticks)


@dataclass
class GameTrace:
    """One simulated game: outcome sequence and running payoff averages."""

    seed: int
    checkpoints: np.ndarray
    avg_x: np.ndarray
    avg_y: np.ndarray
    outcomes: np.ndarray | None = None  # int8 outcome indices, X's perspective

    @property
    def final_x(self) -> float:
        return float(self.avg_x[-1])

    @property
    def final_y(self) -> float:
        return float(self.avg_y[-1])


def _as_agent(player):
    if isinstance(player, StrategyVector):
        return MemoryOneAgent(player)
    if isinstance(player, (tuple, list, np.ndarray)):
        return MemoryOneAgent(StrategyVector(tuple(player)))
    return player


def play_iterated(player_x, player_y, game: StageGame, iterations: int,
                  seed: int, record_outcomes: bool = True) -> GameTrace:
    """Play one iterated game and return its trace.

    Players may be agents or strategy vectors (wrapped as memory-one
    agents).  X draws before Y each round from the shared generator.
    """
    agent_x = _as_agent(player_x)
    agent_y = _as_agent(player_y)
    agent_x.reset()
    agent_y.reset()
    rng = np.random.default_rng(seed)
    checkpoints = checkpoint_schedule(iterations)
    avg_x = np.empty(len(checkpoints))
    avg_y = np.empty(len(checkpoints))
    outcomes = np.empty(iterations, dtype=np.int8) if record_outcomes else None
    sx, sy = game.sx, game.sy
    sum_x = 0.0
    sum_y = 0.0
    tick = 0
    for t in range(1, iterations + 1):
        move_x = agent_x.act(rng)
        move_y = agent_y.act(rng)
        outcome = 2 * (1 - move_x) + (1 - move_y)
        if outcomes is not None:
            outcomes[t - 1] = outcome
        sum_x += sx[outcome]
        sum_y += sy[outcome]
        agent_x.update(move_x, move_y, sx[outcome])
        agent_y.update(move_y, move_x, sy[outcome])
        if checkpoints[tick] == t:
            avg_x[tick] = sum_x / t
            avg_y[tick] = sum_y / t
            tick += 1
    return GameTrace(seed=seed, checkpoints=checkpoints, avg_x=avg_x, avg_y=avg_y,
                     outcomes=outcomes)


@dataclass
class BatchStats:
    """Running-average statistics across a batch of games.

    Holds, per checkpoint, the sum and sum of squares over games of the
    running payoff average, which is enough for means, standard errors
    and mean squared errors against any reference value.
    """

    checkpoints: np.ndarray
    games: int
    sum_x: np.ndarray
    sumsq_x: np.ndarray
    sum_y: np.ndarray
    sumsq_y: np.ndarray

    @property
    def mean_x(self) -> np.ndarray:
        return self.sum_x / self.games

    @property
    def mean_y(self) -> np.ndarray:
        return self.sum_y / self.games

    @property
    def final_x(self) -> float:
        return float(self.mean_x[-1])

    @property
    def final_y(self) -> float:
        return float(self.mean_y[-1])

    def var_x(self) -> np.ndarray:
        return np.maximum(self.sumsq_x / self.games - self.mean_x ** 2, 0.0)

    def var_y(self) -> np.ndarray:
        return np.maximum(self.sumsq_y / self.games - self.mean_y ** 2, 0.0)

    def se_final_x(self) -> float:
        return float(np.sqrt(self.var_x()[-1] / self.games))

    def se_final_y(self) -> float:
        return float(np.sqrt(self.var_y()[-1] / self.games))

    def mse_x(self, reference: float) -> np.ndarray:
        """Mean over games of (running average - reference)^2, per checkpoint."""
        return self.sumsq_x / self.games - 2 * reference * self.mean_x + reference ** 2

    def mse_y(self, reference: float) -> np.ndarray:
        return self.sumsq_y / self.games - 2 * reference * self.mean_y + reference ** 2


def batch_average(player_x, player_y, game: StageGame, iterations: int,
                  games: int, seed: int) -> BatchStats:
    """Average trajectories over many independent games.

    Memory-one pairs (strategy vectors) run vectorised; anything else
    falls back to one agent-driven game at a time.  Game i uses the
    generator seeded with derive_seed(seed, i) on either path.
    """
    if games < 1:
        raise ValueError("games must be positive")
    if isinstance(player_x, (tuple, list)):
        player_x = StrategyVector(tuple(player_x))
    if isinstance(player_y, (tuple, list)):
        player_y = StrategyVector(tuple(player_y))
    if isinstance(player_x, StrategyVector) and isinstance(player_y, StrategyVector):
        return _batch_vectors(player_x, player_y, game, iterations, games, seed)
    return _batch_agents(player_x, player_y, game, iterations, games, seed)


def _accumulate(stats: BatchStats, tick: int, run_x, run_y) -> None:
    stats.sum_x[tick] += np.sum(run_x)
    stats.sumsq_x[tick] += np.sum(run_x ** 2)
    stats.sum_y[tick] += np.sum(run_y)
    stats.sumsq_y[tick] += np.sum(run_y ** 2)


def _empty_stats(checkpoints: np.ndarray, games: int) -> BatchStats:
    z = lambda: np.zeros(len(checkpoints))
    return BatchStats(checkpoints=checkpoints, games=games, sum_x=z(), sumsq_x=z(),
                      sum_y=z(), sumsq_y=z())


def _batch_vectors(x: StrategyVector, y: StrategyVector, game: StageGame,
                   iterations: int, games: int, seed: int) -> BatchStats:
    checkpoints = checkpoint_schedule(iterations)
    stats = _empty_stats(checkpoints, games)
    p = x.as_array()
    q = y.as_array()[[0, 2, 1, 3]]  # opponent sees the mirrored outcome
    sx, sy = game.payoff_vectors()
    chunk = max(1, min(games, _CHUNK_BUDGET // max(iterations, 1)))
    for start in range(0, games, chunk):
        m = min(chunk, games - start)
        draws = np.empty((iterations, m, 2))
        for g in range(m):
            rng = np.random.default_rng(derive_seed(seed, start + g))
            draws[:, g, :] = rng.random((iterations, 2))
        up_x = draws[0, :, 0] < x.first_move
        up_y = draws[0, :, 1] < y.first_move
        outcome = 3 - 2 * up_x - up_y
        run_x = sx[outcome].copy()
        run_y = sy[outcome].copy()
        tick = 0
        if checkpoints[tick] == 1:
            _accumulate(stats, tick, run_x, run_y)
            tick += 1
        for t in range(2, iterations + 1):
            up_x = draws[t - 1, :, 0] < p[outcome]
            up_y = draws[t - 1, :, 1] < q[outcome]
            outcome = 3 - 2 * up_x - up_y
            run_x += sx[outcome]
            run_y += sy[outcome]
            if checkpoints[tick] == t:
                _accumulate(stats, tick, run_x / t, run_y / t)
                tick += 1
    return stats


def _batch_agents(player_x, player_y, game: StageGame, iterations: int,
                  games: int, seed: int) -> BatchStats:
    checkpoints = checkpoint_schedule(iterations)
    stats = _empty_stats(checkpoints, games)
    for g in range(games):
        trace = play_iterated(player_x, player_y, game, iterations,
                              derive_seed(seed, g), record_outcomes=False)
        stats.sum_x += trace.avg_x
        stats.sumsq_x += trace.avg_x ** 2
        stats.sum_y += trace.avg_y
        stats.sumsq_y += trace.avg_y ** 2
    return stats


@dataclass
class Mem1Estimate:
    """Empirical memory-one summary of an agent, from one long game."""

    vector: StrategyVector
    visits: np.ndarray  # times each own-perspective condition was faced
    unvisited: tuple[str, ...]  # conditions never seen, filled with 0.5


def estimate_mem1_equivalent(agent, opponent: StrategyVector, game: StageGame,
                             iterations: int, seed: int) -> Mem1Estimate:
    """Fit conditional up-frequencies to an agent's play against an opponent.

    The agent sits in the X seat against a memory-one opponent.  Each
    round past the first contributes one observation to the condition
    given by the previous outcome in the agent's own perspective.
    """
    agent.reset()
    partner = MemoryOneAgent(opponent)
    partner.reset()
    rng = np.random.default_rng(seed)
    visits = np.zeros(4, dtype=np.int64)
    ups = np.zeros(4, dtype=np.int64)
    cond = None
    first = None
    sx, sy = game.sx, game.sy
    for _ in range(iterations):
        move_x = agent.act(rng)
        move_y = partner.act(rng)
        if cond is None:
            first = move_x
        else:
            visits[cond] += 1
            ups[cond] += move_x
        outcome = 2 * (1 - move_x) + (1 - move_y)
        agent.update(move_x, move_y, sx[outcome])
        partner.update(move_y, move_x, sy[outcome])
        cond = outcome
    probs = np.full(4, 0.5)
    seen = visits > 0
    probs[seen] = ups[seen] / visits[seen]
    unvisited = tuple(OUTCOME_NAMES[i] for i in range(4) if not seen[i])
    vector = StrategyVector(tuple(probs), first_move=float(first))
    return Mem1Estimate(vector=vector, visits=visits, unvisited=unvisited)


# ------------------------------------------------------------------ export

def trace_rows(trace: GameTrace):
    for t, ax, ay in zip(trace.checkpoints, trace.avg_x, trace.avg_y):
        yield int(t), float(ax), float(ay)


def batch_rows(stats: BatchStats):
    for t, ax, ay in zip(stats.checkpoints, stats.mean_x, stats.mean_y):
        yield int(t), float(ax), float(ay)


def _write_csv(rows, schema: str, stream) -> None:
    stream.write(f"# schema={schema}\n")
    writer = csv.writer(stream)
    writer.writerow(["t", "avg_X", "avg_Y"])
    for row in rows:
        writer.writerow(row)


def write_trace_csv(trace: GameTrace, stream) -> None:
    _write_csv(trace_rows(trace), TRACE_SCHEMA, stream)


def write_batch_csv(stats: BatchStats, stream) -> None:
    _write_csv(batch_rows(stats), BATCH_SCHEMA, stream)


def trace_to_dict(trace: GameTrace, include_outcomes: bool = False) -> dict:
    data = {
        "schema": TRACE_SCHEMA,
        "seed": trace.seed,
        "t": [int(v) for v in trace.checkpoints],
        "avg_X": [float(v) for v in trace.avg_x],
        "avg_Y": [float(v) for v in trace.avg_y],
    }
    if include_outcomes and trace.outcomes is not None:
        data["outcomes"] = [OUTCOME_NAMES[i] for i in trace.outcomes]
    return data


def batch_to_dict(stats: BatchStats) -> dict:
    return {
        "schema": BATCH_SCHEMA,
        "games": stats.games,
        "t": [int(v) for v in stats.checkpoints],
        "avg_X": [float(v) for v in stats.mean_x],
        "avg_Y": [float(v) for v in stats.mean_y],
        "se_X": stats.se_final_x(),
        "se_Y": stats.se_final_y(),
    }


def write_json(data: dict, stream) -> None:
    json.dump(data, stream, indent=2)
    stream.write("\n")
