"""Responding to a fixed memory-one strategy.

Best responses by lattice search and projected gradient ascent, payoff
gradients, discounted payoffs for impatient players, and two
applications: probing whether an extortioner can be held below its own
baseline, and the head-to-head outcome of two extortioners.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from zdlab.games import StageGame, maximin
from zdlab.markov import (DEGENERATE_TOL, StrategyVector, determinant_stack,
                          expected_payoffs, first_distribution, transition_matrix)
from zdlab.zd import extortion_ranges, synth_extortion

GRID_POINTS = 11
ASCENT_STEP = 0.05
ASCENT_RESTARTS = 20
ASCENT_ROUNDS = 200
# payoff spread below which an objective counts as flat
INDIFFERENT_SPREAD = 1e-9
# payoff ties this close are resolved toward the cooperative corner
TIE_TOL = 1e-9


def _strategy(value) -> StrategyVector:
    if isinstance(value, StrategyVector):
        return value
    return StrategyVector(tuple(value))


def _lattice(resolution: int) -> np.ndarray:
    axis = np.linspace(0.0, 1.0, resolution)
    grid = np.stack(np.meshgrid(axis, axis, axis, axis, indexing="ij"), axis=-1)
    corners = np.stack(np.meshgrid(*([[0.0, 1.0]] * 4), indexing="ij"), axis=-1)
    return np.vstack([grid.reshape(-1, 4), corners.reshape(-1, 4)])


def _pi_y_stack(p: StrategyVector, qs: np.ndarray, game: StageGame) -> np.ndarray:
    """pi_Y for each stacked response, determinant ratio with Cesaro fallback."""
    sy = np.array(game.sy, dtype=float)
    numer = determinant_stack(p.as_array(), qs, sy)
    denom = determinant_stack(p.as_array(), qs, np.ones(4))
    vals = np.empty(len(qs))
    ok = np.abs(denom) > DEGENERATE_TOL
    vals[ok] = numer[ok] / denom[ok]
    for i in np.nonzero(~ok)[0]:
        vals[i] = expected_payoffs(p, StrategyVector(tuple(qs[i])), game).y
    return vals


def _pi_y(p: StrategyVector, q: np.ndarray, game: StageGame) -> float:
    return float(_pi_y_stack(p, q[None, :], game)[0])


@dataclass(frozen=True)
class BestResponse:
    """Outcome of a best-response search for the Y seat."""

    q_star: StrategyVector
    payoff: float
    method: str
    indifferent: bool
    trajectory: tuple | None = None


def _most_cooperative(qs: np.ndarray, vals: np.ndarray) -> int:
    """Among payoff ties at the top, pick the most cooperative candidate.

    The maximiser is often a whole face of the cube (coordinates the
    stationary play never visits are free), so ties are broken by total
    up-weight, then componentwise.
    """
    tied = np.nonzero(vals >= vals.max() - TIE_TOL)[0]
    keys = (qs[tied, 3], qs[tied, 2], qs[tied, 1], qs[tied, 0], qs[tied].sum(axis=1))
    return int(tied[np.lexsort(keys)[-1]])


def best_response(strategy, game: StageGame, method: str = "grid",
                  resolution: int = GRID_POINTS, restarts: int = ASCENT_RESTARTS,
                  step: float = ASCENT_STEP, seed: int = 0) -> BestResponse:
    """Search for the response maximising Y's long-run payoff.

    The grid method sweeps a lattice on the cube plus all corners; the
    ascent method runs projected gradient ascent from random starts.
    A flat objective (every probe ties) is flagged indifferent.
    """
    p = _strategy(strategy)
    if method == "grid":
        qs = _lattice(resolution)
        vals = _pi_y_stack(p, qs, game)
        i = _most_cooperative(qs, vals)
        flat = float(vals.max() - vals.min()) < INDIFFERENT_SPREAD
        return BestResponse(StrategyVector(tuple(qs[i])), float(vals[i]), "grid", flat)
    if method == "ascent":
        return _ascend(p, game, restarts, step, seed)
    raise ValueError(f"unknown method {method!r}, expected 'grid' or 'ascent'")


def _climb(p: StrategyVector, q: np.ndarray, val: float, game: StageGame,
           step: float, traj: list) -> tuple[np.ndarray, float]:
    for _ in range(ASCENT_ROUNDS):
        try:
            grad = payoff_gradient(p, q, game)
        except ValueError:
            break
        size = step
        improved = False
        while size > 1e-7:
            cand = np.clip(q + size * grad, 0.0, 1.0)
            cand_val = _pi_y(p, cand, game)
            if cand_val > val + 1e-12:
                q, val = cand, cand_val
                traj.append((StrategyVector(tuple(q)), val))
                improved = True
                break
            size /= 2
        if not improved:
            break
    return q, val


def _polish_up(p: StrategyVector, q: np.ndarray, val: float, game: StageGame,
               traj: list) -> tuple[np.ndarray, float, bool]:
    """Resolve flat directions toward up, one coordinate at a time.

    Coordinates the stationary play never visits leave the payoff
    unchanged; pushing them to the cooperative end gives a canonical
    representative of the maximising face.
    """
    changed = False
    for i in range(4):
        if q[i] == 1.0:
            continue
        cand = q.copy()
        cand[i] = 1.0
        cand_val = _pi_y(p, cand, game)
        if cand_val >= val - 1e-12:
            q, val = cand, max(val, cand_val)
            traj.append((StrategyVector(tuple(q)), val))
            changed = True
    return q, val, changed


def _ascend(p: StrategyVector, game: StageGame, restarts: int, step: float,
            seed: int) -> BestResponse:
    rng = np.random.default_rng(seed)
    starts = [np.full(4, 0.5)] + [rng.random(4) for _ in range(restarts - 1)]
    start_vals = []
    best = None
    for q0 in starts:
        q = q0.copy()
        val = _pi_y(p, q, game)
        start_vals.append(val)
        traj = [(StrategyVector(tuple(q)), val)]
        for _ in range(3):
            q, val = _climb(p, q, val, game, step, traj)
            q, val, polished = _polish_up(p, q, val, game, traj)
            if not polished:
                break
        if best is None or val > best[1]:
            best = (q, val, traj)
    # flatness is judged at the starts, before they all climb to the optimum
    flat = (max(start_vals) - min(start_vals)) < INDIFFERENT_SPREAD
    q, val, traj = best
    return BestResponse(StrategyVector(tuple(q)), val, "ascent", flat, tuple(traj))


def _pi_y_strict(p: StrategyVector, q: np.ndarray, game: StageGame) -> float:
    sy = np.array(game.sy, dtype=float)
    numer = float(determinant_stack(p.as_array(), q, sy)[0])
    denom = float(determinant_stack(p.as_array(), q, np.ones(4))[0])
    if abs(denom) <= DEGENERATE_TOL:
        raise ValueError("payoff is start-dependent along the stencil, "
                         "no well-defined gradient here")
    return numer / denom


def payoff_gradient(strategy, q, game: StageGame, h: float = 1e-6) -> np.ndarray:
    """Finite-difference gradient of pi_Y in the response vector.

    Central differences, falling back to one-sided steps against the
    cube walls.  Raises when any stencil point has a start-dependent
    chain, where the determinant ratio (and the derivative) breaks down.
    """
    p = _strategy(strategy)
    base = np.asarray(q.probs if isinstance(q, StrategyVector) else q, dtype=float)
    grad = np.empty(4)
    for i in range(4):
        lo = base.copy()
        hi = base.copy()
        if base[i] + h > 1.0:
            lo[i] -= h
        elif base[i] - h < 0.0:
            hi[i] += h
        else:
            lo[i] -= h
            hi[i] += h
        width = hi[i] - lo[i]
        grad[i] = (_pi_y_strict(p, hi[None, :], game)
                   - _pi_y_strict(p, lo[None, :], game)) / width
    return grad


@dataclass(frozen=True)
class DiscountSpec:
    """Per-round continuation weight and the opening outcome distribution."""

    delta: float
    mu1: tuple | None = None

    def __post_init__(self):
        if not 0.0 < self.delta <= 1.0:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")


def discounted_payoff(strategy_x, strategy_y, game: StageGame, spec: DiscountSpec,
                      player: str = "x") -> float:
    """Normalised discounted payoff (1-delta) sum_t delta^(t-1) E[payoff at t].

    Evaluated exactly by solving (I - delta M) v = s.  delta = 1 is the
    undiscounted average and belongs to expected_payoffs.
    """
    if spec.delta >= 1.0:
        raise ValueError("delta=1 is the undiscounted average, use expected_payoffs")
    if player not in ("x", "y"):
        raise ValueError(f"player must be 'x' or 'y', got {player!r}")
    x = _strategy(strategy_x)
    y = _strategy(strategy_y)
    M = transition_matrix(x, y)
    if spec.mu1 is None:
        mu1 = first_distribution(x, y)
    else:
        mu1 = np.asarray(spec.mu1, dtype=float)
        if mu1.shape != (4,) or abs(mu1.sum() - 1) > 1e-9 or (mu1 < 0).any():
            raise ValueError("mu1 must be a distribution over the four outcomes")
    s = np.array(game.sx if player == "x" else game.sy, dtype=float)
    v = np.linalg.solve(np.eye(4) - spec.delta * M, s)
    return float((1 - spec.delta) * (mu1 @ v))


def _stacked_transitions(p: np.ndarray, qs: np.ndarray) -> np.ndarray:
    q_sw = qs[:, [0, 2, 1, 3]]  # the opponent conditions on the mirrored outcome
    n = len(qs)
    M = np.empty((n, 4, 4))
    for r in range(4):
        a = p[r]
        b = q_sw[:, r]
        M[:, r, 0] = a * b
        M[:, r, 1] = a * (1 - b)
        M[:, r, 2] = (1 - a) * b
        M[:, r, 3] = (1 - a) * (1 - b)
    return M


def allu_discount_threshold(strategy, game: StageGame, mu1=None,
                            resolution: int = GRID_POINTS, tol: float = 1e-4) -> float:
    """Patience below which always-up stops being the discounted best response.

    Bisects delta against a lattice of responses.  The opening
    distribution is held fixed (default: the strategy's own first move
    against a coin flip) so only conditional play is compared.
    """
    p = _strategy(strategy)
    qs = _lattice(resolution)
    sy = np.array(game.sy, dtype=float)
    if mu1 is None:
        f = p.first_move
        mu1 = np.array([f * 0.5, f * 0.5, (1 - f) * 0.5, (1 - f) * 0.5])
    else:
        mu1 = np.asarray(mu1, dtype=float)
    Ms = _stacked_transitions(p.as_array(), qs)
    stakes = np.broadcast_to(sy, (len(qs), 4))[..., None]
    allu = np.all(qs == 1.0, axis=1)

    def allu_is_best(delta: float) -> bool:
        v = np.linalg.solve(np.eye(4)[None] - delta * Ms, stakes)[..., 0]
        vals = (1 - delta) * (v @ mu1)
        return vals[allu].max() >= vals.max() - 1e-9

    lo, hi = 1e-6, 1 - 1e-9
    if allu_is_best(lo):
        return lo
    if not allu_is_best(hi):
        raise ValueError("always-up is not the patient best response here")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if allu_is_best(mid):
            hi = mid
        else:
            lo = mid
    return hi


def retaliation_feasible(game: StageGame, delta: float | None = None,
                         chi: float = 10.0, resolution: int = GRID_POINTS):
    """Whether an extortioner at the given baseline can be held below it.

    At the mutual-down baseline the closed test (T+S) < 2P decides; away
    from it a lattice search over responses does.  Returns the verdict
    and, when some response pushes the extorter strictly below the
    baseline, a witness response.
    """
    if not game.is_symmetric:
        raise ValueError("retaliation analysis needs a symmetric game")
    R, S, T, P = game.sx
    if delta is None:
        delta = maximin(game)[0]
    chi_range = extortion_ranges(game, delta)
    use_chi = max(chi_range.lo, min(chi, chi_range.hi))
    p = synth_extortion(game, chi=use_chi, delta=delta)
    qs = _lattice(resolution)
    vals = _pi_y_stack(p, qs, game)
    i = int(np.argmin(vals))
    found = vals[i] < delta - 1e-9
    if abs(delta - P) <= 1e-12:
        feasible = (T + S) < 2 * P
    else:
        feasible = found
    witness = StrategyVector(tuple(qs[i])) if found else None
    return feasible, witness


@dataclass(frozen=True)
class ExtortionSpec:
    """Parameters of one extortion seat; delta and phi fall back to defaults."""

    chi: float
    delta: float | None = None
    phi: float | None = None


def dual_zd_outcome(game: StageGame, spec_x: ExtortionSpec, spec_y: ExtortionSpec,
                    tol: float = 1e-9) -> tuple[float, float]:
    """Payoff pair when both seats play extortion strategies.

    Both linear constraints pin the outcome; the pair is computed from
    the synthesized vectors and both residuals are verified.
    """
    px = synth_extortion(game, spec_x.chi, spec_x.delta, spec_x.phi, side="x")
    qy = synth_extortion(game, spec_y.chi, spec_y.delta, spec_y.phi, side="y")
    result = expected_payoffs(px, qy, game)
    dx = spec_x.delta if spec_x.delta is not None else maximin(game)[0]
    dy = spec_y.delta if spec_y.delta is not None else maximin(game)[1]
    res_x = (result.x - dx) - spec_x.chi * (result.y - dx)
    res_y = (result.y - dy) - spec_y.chi * (result.x - dy)
    if abs(res_x) > tol or abs(res_y) > tol:
        raise RuntimeError("extortion constraints not both satisfied: "
                           f"residuals {res_x:.3e}, {res_y:.3e}")
    return result.x, result.y
