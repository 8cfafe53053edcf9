"""Long-run analysis of the outcome chain driven by two memory-one strategies.

A memory-one strategy is four probabilities of playing "up" conditioned
on the previous outcome, in the owner's own perspective order (uu, ud,
du, dd), plus a first-move probability for the opening round.  Two such
strategies induce a Markov chain on the four outcomes; expected payoffs
per round come from a determinant identity when the chain has a unique
stationary distribution, and from Cesaro (time average) limits when it
does not.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from zdlab.games import OUTCOME_NAMES, StageGame

CLAMP_TOL = 1e-12
# below this the determinant denominator counts as singular
DEGENERATE_TOL = 1e-10
# below this the determinant result is cross-checked against the time average
CROSSCHECK_TOL = 1e-6

# Y conditions on the outcome as Y saw it, which swaps the middle entries
# of X's outcome order
_SWAP = (0, 2, 1, 3)


@dataclass(frozen=True)
class StrategyVector:
    """Conditional up-probabilities (uu, ud, du, dd) plus the opening move."""

    probs: tuple[float, float, float, float]
    first_move: float = 0.5

    def __post_init__(self):
        probs = tuple(_clamp_unit(v, f"component {i + 1}") for i, v in enumerate(self.probs))
        if len(probs) != 4:
            raise ValueError("strategy vector needs 4 conditional probabilities")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "first_move", _clamp_unit(self.first_move, "first move"))

    def as_array(self) -> np.ndarray:
        return np.array(self.probs, dtype=float)

    def __getitem__(self, i: int) -> float:
        return self.probs[i]


def _clamp_unit(value, label: str) -> float:
    v = float(value)
    if v < -CLAMP_TOL or v > 1 + CLAMP_TOL:
        raise ValueError(f"{label} must lie in [0, 1], got {value}")
    return min(1.0, max(0.0, v))


def tit_for_tat() -> StrategyVector:
    """Copy the opponent's previous move, opening with up."""
    return StrategyVector((1, 0, 1, 0), first_move=1.0)


def always_up() -> StrategyVector:
    return StrategyVector((1, 1, 1, 1), first_move=1.0)


def always_down() -> StrategyVector:
    return StrategyVector((0, 0, 0, 0), first_move=0.0)


def randomizer(prob: float = 0.5) -> StrategyVector:
    """Play up with a fixed probability regardless of history."""
    return StrategyVector((prob, prob, prob, prob), first_move=prob)


def _vec(strategy) -> np.ndarray:
    if isinstance(strategy, StrategyVector):
        return strategy.as_array()
    arr = np.asarray(strategy, dtype=float)
    if arr.shape != (4,):
        raise ValueError("strategy must be a StrategyVector or 4 probabilities")
    if arr.min() < -CLAMP_TOL or arr.max() > 1 + CLAMP_TOL:
        raise ValueError("strategy components must lie in [0, 1]")
    return np.clip(arr, 0.0, 1.0)


def first_distribution(x, y) -> np.ndarray:
    """Outcome distribution of the opening round, from independent first moves."""
    fx = x.first_move if isinstance(x, StrategyVector) else 0.5
    fy = y.first_move if isinstance(y, StrategyVector) else 0.5
    return np.array([fx * fy, fx * (1 - fy), (1 - fx) * fy, (1 - fx) * (1 - fy)])


def transition_matrix(x, y) -> np.ndarray:
    """Outcome-to-outcome transition matrix in X's perspective order."""
    p = _vec(x)
    q = _vec(y)[list(_SWAP)]  # align Y's conditioning with X's outcome labels
    up_x = p[:, None] * np.array([1.0, 1.0, 0.0, 0.0])[None, :] \
        + (1 - p)[:, None] * np.array([0.0, 0.0, 1.0, 1.0])[None, :]
    up_y = q[:, None] * np.array([1.0, 0.0, 1.0, 0.0])[None, :] \
        + (1 - q)[:, None] * np.array([0.0, 1.0, 0.0, 1.0])[None, :]
    return up_x * up_y


def payoff_determinant(x, y, f) -> float:
    """Determinant form D(p, q, f), linear in the stake vector f.

    With f = 1 this is (up to sign) the normalisation of the stationary
    distribution, and D(p, q, s) / D(p, q, 1) is the expected payoff on
    the stake vector s whenever the denominator is nonzero.
    """
    p = _vec(x)
    q = _vec(y)
    f = np.asarray(f, dtype=float)
    m = np.array([
        [p[0] * q[0] - 1, p[0] - 1, q[0] - 1, f[0]],
        [p[1] * q[2],     p[1] - 1, q[2],     f[1]],
        [p[2] * q[1],     p[2],     q[1] - 1, f[2]],
        [p[3] * q[3],     p[3],     q[3],     f[3]],
    ])
    return float(np.linalg.det(m))


def determinant_stack(ps: np.ndarray, qs: np.ndarray, f) -> np.ndarray:
    """payoff_determinant over stacked strategy rows, vectorised.

    ps and qs are (n, 4) arrays (either may be a single (4,) row, which
    broadcasts); f is one stake vector shared by all rows.
    """
    P = np.atleast_2d(np.asarray(ps, dtype=float))
    Q = np.atleast_2d(np.asarray(qs, dtype=float))
    n = max(P.shape[0], Q.shape[0])
    P = np.broadcast_to(P, (n, 4))
    Q = np.broadcast_to(Q, (n, 4))
    f = np.asarray(f, dtype=float)
    m = np.empty((n, 4, 4))
    m[:, 0, 0] = P[:, 0] * Q[:, 0] - 1
    m[:, 1, 0] = P[:, 1] * Q[:, 2]
    m[:, 2, 0] = P[:, 2] * Q[:, 1]
    m[:, 3, 0] = P[:, 3] * Q[:, 3]
    m[:, 0, 1] = P[:, 0] - 1
    m[:, 1, 1] = P[:, 1] - 1
    m[:, 2, 1] = P[:, 2]
    m[:, 3, 1] = P[:, 3]
    m[:, 0, 2] = Q[:, 0] - 1
    m[:, 1, 2] = Q[:, 2]
    m[:, 2, 2] = Q[:, 1] - 1
    m[:, 3, 2] = Q[:, 3]
    m[:, :, 3] = f[None, :]
    return np.linalg.det(m)


@dataclass(frozen=True)
class PayoffResult:
    """Per-round expected payoffs for both players and how they were obtained."""

    x: float
    y: float
    method: str  # "determinant" or "cesaro"
    start_dependent: bool
    denominator: float

    def __iter__(self):
        yield self.x
        yield self.y


def expected_payoffs(x, y, game: StageGame, mu1=None) -> PayoffResult:
    """Long-run per-round payoffs of x against y.

    The determinant identity is used when its denominator is safely
    nonzero; otherwise the Cesaro average of the chain started from mu1
    (default: the product of both first moves) decides, and the result
    is flagged as start dependent.  Near-singular denominators get the
    Cesaro computation as a cross-check.
    """
    sx, sy = game.payoff_vectors()
    d1 = payoff_determinant(x, y, np.ones(4))
    if mu1 is None:
        mu1 = first_distribution(x, y)
    if abs(d1) > DEGENERATE_TOL:
        px = payoff_determinant(x, y, sx) / d1
        py = payoff_determinant(x, y, sy) / d1
        if abs(d1) < CROSSCHECK_TOL:
            dist = cesaro_stationary(transition_matrix(x, y), mu1)
            cx, cy = float(dist @ sx), float(dist @ sy)
            if abs(cx - px) > 1e-7 or abs(cy - py) > 1e-7:
                return PayoffResult(cx, cy, "cesaro", True, d1)
        return PayoffResult(px, py, "determinant", False, d1)
    dist = cesaro_stationary(transition_matrix(x, y), mu1)
    return PayoffResult(float(dist @ sx), float(dist @ sy), "cesaro", True, d1)


def cesaro_matrix(M, horizon: int = 4) -> np.ndarray:
    """Average of the first `horizon` powers of M, starting at the identity."""
    M = np.asarray(M, dtype=float)
    acc = np.eye(M.shape[0])
    power = np.eye(M.shape[0])
    for _ in range(horizon - 1):
        power = power @ M
        acc = acc + power
    return acc / horizon


def cesaro_stationary(M, mu1, tol: float = 1e-12, max_horizon: int = 2 ** 60) -> np.ndarray:
    """Cesaro limit distribution of the chain started from mu1.

    Doubles the averaging window each step (the horizon-2n average is a
    mix of the horizon-n average with its pushforward), so even periodic
    chains converge in a few dozen steps.  Raises if the successive
    averages have not settled to `tol` by `max_horizon`.
    """
    M = np.asarray(M, dtype=float)
    avg = np.asarray(mu1, dtype=float).copy()
    total = avg.sum()
    if not np.isfinite(total) or abs(total - 1) > 1e-9 or avg.min() < -1e-12:
        raise ValueError("mu1 must be a probability distribution")
    power = M.copy()
    horizon = 1
    while horizon < max_horizon:
        nxt = (avg + avg @ power) / 2
        power = power @ power
        # rounding drift in the unit eigenvalue would double on every
        # squaring, so force the rows back onto the simplex each time
        np.clip(power, 0.0, None, out=power)
        power /= power.sum(axis=1, keepdims=True)
        horizon *= 2
        done = np.abs(nxt - avg).max() < tol
        avg = np.clip(nxt, 0.0, None)
        avg /= avg.sum()
        if done:
            return avg
    raise RuntimeError(f"time averages did not settle within horizon {max_horizon}")


def reachable_states(M, mu1, tol: float = 1e-15) -> list[int]:
    """States reachable from the support of mu1 along positive transitions."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    seen = {int(i) for i in np.nonzero(np.asarray(mu1, dtype=float) > tol)[0]}
    frontier = list(seen)
    while frontier:
        i = frontier.pop()
        for j in range(n):
            if M[i, j] > tol and j not in seen:
                seen.add(j)
                frontier.append(j)
    return sorted(seen)


@dataclass(frozen=True)
class ConvergenceBound:
    """Constant C such that the mean squared error of running averages is at most C / t."""

    constant: float
    epsilon: float
    s_hat: float
    reduced_states: tuple[str, ...]
    column: str  # reduced state whose averaged-chain column supplies epsilon


def convergence_constant(x, y, s_hat: float, mu1=None) -> ConvergenceBound:
    """Finite-time bound C = 6 s_hat^2 / eps for the pair (x, y).

    eps is the best column floor of the 4-step averaged chain restricted
    to the states actually reachable from the opening distribution:
    every reachable state puts at least eps of 4-step-average mass on
    the chosen column state, wherever it starts.
    """
    M = transition_matrix(x, y)
    if mu1 is None:
        mu1 = first_distribution(x, y)
    states = reachable_states(M, mu1)
    sub = M[np.ix_(states, states)]
    averaged = cesaro_matrix(sub, 4)
    col_mins = averaged.min(axis=0)
    j = int(np.argmax(col_mins))
    eps = float(col_mins[j])
    if eps <= 0:
        raise ValueError("reachable chain splits into pieces, no single column floor exists")
    return ConvergenceBound(
        constant=6 * s_hat ** 2 / eps,
        epsilon=eps,
        s_hat=float(s_hat),
        reduced_states=tuple(OUTCOME_NAMES[i] for i in states),
        column=OUTCOME_NAMES[states[j]],
    )
