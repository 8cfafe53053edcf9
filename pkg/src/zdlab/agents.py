"""Playable agents for round-by-round simulation.

Moves are the ints UP = 1 and DOWN = 0.  Every agent draws exactly one
uniform from the passed generator per act() call, even when its move is
forced, so the random stream consumed by a game depends only on the
round count.  That keeps traces reproducible when an agent is swapped
for a scripted or estimated stand-in.
"""

from __future__ import annotations

import numpy as np

from zdlab.markov import StrategyVector

UP, DOWN = 1, 0


class MemoryOneAgent:
    """Plays a strategy vector: up-probabilities conditioned on the last outcome."""

    def __init__(self, vector: StrategyVector):
        self.vector = vector
        self.reset()

    def reset(self) -> None:
        self._cond = None

    def act(self, rng: np.random.Generator) -> int:
        if self._cond is None:
            prob = self.vector.first_move
        else:
            prob = self.vector.probs[self._cond]
        return UP if rng.random() < prob else DOWN

    def update(self, own_move: int, opp_move: int, payoff: float) -> None:
        # own-perspective outcome index: (own, opp) = (up, up) is 0, (down, down) is 3
        self._cond = 2 * (1 - own_move) + (1 - opp_move)


class RothErevLearner:
    """Propensity matching: payoffs above the floor reinforce the move played.

    Both moves start with propensity 1 and are chosen proportionally.
    floor should be the smallest own stage payoff, so increments never
    go negative.
    """

    def __init__(self, floor: float):
        self.floor = float(floor)
        self.reset()

    def reset(self) -> None:
        self.propensity = [1.0, 1.0]  # indexed by move: [DOWN, UP]

    def act(self, rng: np.random.Generator) -> int:
        p_up = self.propensity[UP] / (self.propensity[UP] + self.propensity[DOWN])
        return UP if rng.random() < p_up else DOWN

    def update(self, own_move: int, opp_move: int, payoff: float) -> None:
        self.propensity[own_move] += payoff - self.floor


class TwoDownsPunisher:
    """Plays down only after the opponent played down twice in a row.

    A memory-two rule, used to probe how much a memory-one summary of a
    longer-memory opponent gives away.
    """

    def reset(self) -> None:
        self._seen = (UP, UP)

    def __init__(self):
        self.reset()

    def act(self, rng: np.random.Generator) -> int:
        rng.random()  # keep the one-draw-per-round discipline
        return DOWN if self._seen == (DOWN, DOWN) else UP

    def update(self, own_move: int, opp_move: int, payoff: float) -> None:
        self._seen = (self._seen[1], opp_move)


class ScriptedAgent:
    """Replays a fixed move list, drawing and ignoring one uniform per round."""

    def __init__(self, moves):
        self.moves = [int(m) for m in moves]
        self.reset()

    def reset(self) -> None:
        self._next = 0

    def act(self, rng: np.random.Generator) -> int:
        rng.random()
        if self._next >= len(self.moves):
            raise IndexError("scripted agent ran out of moves")
        move = self.moves[self._next]
        self._next += 1
        return move

    def update(self, own_move: int, opp_move: int, payoff: float) -> None:
        pass
