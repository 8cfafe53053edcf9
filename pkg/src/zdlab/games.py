"""Stage games for iterated 2x2 play.

Both players pick one of two actions each round, called "up" and "down".
Payoff vectors are ordered by the outcome pairs

    (up, up), (up, down), (down, up), (down, down)

where the first move is always X's, and each vector lists what its owner
earns at that outcome: sy[1] is Y's payoff when X played up and Y played
down.  The symmetric families use the usual letters (reward R, sucker S,
temptation T, punishment P); the battle of the sexes uses F (favourite
event, together), C (alone at one's favourite), L (alone at the
partner's favourite) and D (deferred, but together).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GAME_SCHEMA = "zdlab.game/1"

# outcome indices, X's perspective
UU, UD, DU, DD = 0, 1, 2, 3
OUTCOME_NAMES = ("uu", "ud", "du", "dd")


@dataclass(frozen=True)
class StageGame:
    """A 2x2 stage game held as both players' payoff vectors.

    sx and sy follow the outcome order (uu, ud, du, dd), each from its
    owner's perspective: sy[UD] is what Y earns when X plays up and Y
    plays down.
    """

    name: str
    sx: tuple[float, float, float, float]
    sy: tuple[float, float, float, float]
    kind: str = "general"

    @property
    def is_symmetric(self) -> bool:
        sx = self.sx
        return self.sy == (sx[0], sx[2], sx[1], sx[3])

    @property
    def s_hat(self) -> float:
        """Largest payoff magnitude, the scale constant of the game."""
        return max(abs(v) for v in self.sx + self.sy)

    def payoff_vectors(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array(self.sx, dtype=float), np.array(self.sy, dtype=float)


def _as4(values) -> tuple[float, float, float, float]:
    vals = tuple(float(v) for v in values)
    if len(vals) != 4:
        raise ValueError("expected 4 payoffs in outcome order (uu, ud, du, dd)")
    return vals


def symmetric_game(R: float, S: float, T: float, P: float, name: str = "symmetric") -> StageGame:
    """Symmetric game from its (R, S, T, P) letters, no ordering imposed."""
    return StageGame(name=name, sx=_as4((R, S, T, P)), sy=_as4((R, T, S, P)), kind="symmetric")


def prisoners_dilemma(R: float = 3, S: float = 0, T: float = 5, P: float = 1,
                      name: str = "pd") -> StageGame:
    """Prisoner's dilemma: T > R > P > S and 2R > T + S."""
    if not (T > R > P > S):
        raise ValueError(f"prisoner's dilemma needs T > R > P > S, got T={T} R={R} P={P} S={S}")
    if not (2 * R > T + S):
        raise ValueError(f"prisoner's dilemma needs 2R > T + S, got 2R={2 * R} T+S={T + S}")
    return symmetric_game(R, S, T, P, name=name)


def stag_hunt(R: float = 10, S: float = 0, T: float = 8, P: float = 8,
              name: str = "sh") -> StageGame:
    """Stag hunt: R > T >= P > S."""
    if not (R > T >= P > S):
        raise ValueError(f"stag hunt needs R > T >= P > S, got R={R} T={T} P={P} S={S}")
    return symmetric_game(R, S, T, P, name=name)


def game_of_chicken(R: float = 6, S: float = 2, T: float = 7, P: float = 0,
                    name: str = "gc") -> StageGame:
    """Game of chicken: T > R > S >= P."""
    if not (T > R > S >= P):
        raise ValueError(f"game of chicken needs T > R > S >= P, got T={T} R={R} S={S} P={P}")
    return symmetric_game(R, S, T, P, name=name)


def battle_of_sexes(F: float = 5, C: float = 1, L: float = 1, D: float = 3,
                    name: str = "bs") -> StageGame:
    """Battle of the sexes: F > D > C >= L.

    X's "up" means attending X's favourite event, so (up, up) pays X the
    favourite value F while Y earns only the deferred value D; (down,
    down) mirrors this in Y's favour.
    """
    if not (F > D > C >= L):
        raise ValueError(f"battle of the sexes needs F > D > C >= L, got F={F} D={D} C={C} L={L}")
    return StageGame(name=name, sx=_as4((F, C, L, D)), sy=_as4((D, C, L, F)), kind="sexes")


_CANONICAL = {
    "pd": prisoners_dilemma,
    "sh": stag_hunt,
    "gc": game_of_chicken,
    "bs": battle_of_sexes,
}


def canonical_game(name: str) -> StageGame:
    """One of the four canonical games: pd, sh, gc or bs."""
    try:
        return _CANONICAL[name.lower()]()
    except KeyError:
        raise ValueError(f"unknown game {name!r}, expected one of {sorted(_CANONICAL)}") from None


def _own_matrices(game: StageGame) -> tuple[np.ndarray, np.ndarray]:
    """Per-player 2x2 matrices, rows own action (up, down), cols opponent action."""
    sx, sy = game.sx, game.sy
    ax = np.array([[sx[UU], sx[UD]], [sx[DU], sx[DD]]])
    ay = np.array([[sy[UU], sy[DU]], [sy[UD], sy[DD]]])
    return ax, ay


def _maximin_value(own: np.ndarray) -> float:
    # worst case over opponent columns is piecewise linear in the own mixing
    # weight, so the optimum sits at 0, 1 or the crossing point
    candidates = [0.0, 1.0]
    den = own[0, 1] + own[1, 0] - own[0, 0] - own[1, 1]
    if abs(den) > 1e-12:
        x = (own[1, 0] - own[1, 1]) / den
        if 0.0 < x < 1.0:
            candidates.append(x)
    best = -np.inf
    for x in candidates:
        worst = min(x * own[0, 0] + (1 - x) * own[1, 0],
                    x * own[0, 1] + (1 - x) * own[1, 1])
        best = max(best, worst)
    return float(best)


def maximin(game: StageGame) -> tuple[float, float]:
    """Guaranteed values (X, Y) under worst-case opponent play; equal for symmetric games."""
    ax, ay = _own_matrices(game)
    return _maximin_value(ax), _maximin_value(ay)


@dataclass(frozen=True)
class NashPoint:
    """One-shot equilibrium profile as up-probabilities plus its payoffs."""

    x_up: float
    y_up: float
    payoffs: tuple[float, float]
    kind: str  # "pure" or "mixed"


def profile_payoffs(game: StageGame, x_up: float, y_up: float) -> tuple[float, float]:
    """Expected payoffs when both sides mix independently with the given up-probabilities."""
    dist = np.array([x_up * y_up, x_up * (1 - y_up), (1 - x_up) * y_up,
                     (1 - x_up) * (1 - y_up)])
    sx, sy = game.payoff_vectors()
    return float(dist @ sx), float(dist @ sy)


def stage_nash(game: StageGame) -> list[NashPoint]:
    """All pure equilibria plus the interior mixed equilibrium if one exists."""
    ax, ay = _own_matrices(game)
    points = []
    for i, x in enumerate((1.0, 0.0)):
        for j, y in enumerate((1.0, 0.0)):
            x_ok = ax[i, j] >= ax[1 - i, j] - 1e-12
            y_ok = ay[j, i] >= ay[1 - j, i] - 1e-12
            if x_ok and y_ok:
                points.append(NashPoint(x, y, profile_payoffs(game, x, y), "pure"))
    dx = ax[0, 0] - ax[1, 0] - ax[0, 1] + ax[1, 1]
    dy = ay[0, 0] - ay[1, 0] - ay[0, 1] + ay[1, 1]
    if abs(dx) > 1e-12 and abs(dy) > 1e-12:
        # each side mixes to leave the other indifferent
        y_star = (ax[1, 1] - ax[0, 1]) / dx
        x_star = (ay[1, 1] - ay[0, 1]) / dy
        if 1e-9 < x_star < 1 - 1e-9 and 1e-9 < y_star < 1 - 1e-9:
            points.append(NashPoint(float(x_star), float(y_star),
                                    profile_payoffs(game, x_star, y_star), "mixed"))
    return points


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> list[tuple[float, float]]:
    """Convex hull in counterclockwise order (monotone chain), collinear points dropped."""
    pts = sorted({(float(x), float(y)) for x, y in points})
    if len(pts) <= 2:
        return pts

    def build(seq):
        out: list[tuple[float, float]] = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= 1e-12:
                out.pop()
            out.append(p)
        return out

    lower = build(pts)
    upper = build(reversed(pts))
    return lower[:-1] + upper[:-1]


def clip_line(alpha: float, beta: float, gamma: float,
              box) -> list[tuple[float, float]] | None:
    """Segment of alpha*x + beta*y + gamma = 0 inside (x0, x1, y0, y1).

    Returns the two endpoints, or None when the line misses the box or
    the coefficients are degenerate.
    """
    x0, x1, y0, y1 = box
    if abs(alpha) < 1e-12 and abs(beta) < 1e-12:
        return None
    if abs(alpha) >= abs(beta):
        point = np.array([-(beta * (y0 + y1) / 2 + gamma) / alpha,
                          (y0 + y1) / 2])
    else:
        point = np.array([(x0 + x1) / 2,
                          -(alpha * (x0 + x1) / 2 + gamma) / beta])
    direction = np.array([beta, -alpha])
    direction = direction / np.linalg.norm(direction)
    lo, hi = -np.inf, np.inf
    for axis, (c0, c1) in enumerate(((x0, x1), (y0, y1))):
        d = direction[axis]
        if abs(d) < 1e-12:
            if not (c0 - 1e-9 <= point[axis] <= c1 + 1e-9):
                return None
            continue
        t0 = (c0 - point[axis]) / d
        t1 = (c1 - point[axis]) / d
        lo = max(lo, min(t0, t1))
        hi = min(hi, max(t0, t1))
    if lo > hi:
        return None
    return [(float(point[0] + t * direction[0]),
             float(point[1] + t * direction[1])) for t in (lo, hi)]


def in_hull(hull, point, tol: float = 1e-9) -> bool:
    """Whether a point lies inside a counterclockwise polygon, with tolerance."""
    n = len(hull)
    if n == 1:
        return abs(point[0] - hull[0][0]) <= tol and abs(point[1] - hull[0][1]) <= tol
    if n == 2:
        a, b = hull
        if abs(_cross(a, b, point)) > tol:
            return False
        lo0, hi0 = sorted((a[0], b[0]))
        lo1, hi1 = sorted((a[1], b[1]))
        return lo0 - tol <= point[0] <= hi0 + tol and lo1 - tol <= point[1] <= hi1 + tol
    return all(_cross(hull[i], hull[(i + 1) % n], point) >= -tol for i in range(n))


def payoff_region(game: StageGame) -> list[tuple[float, float]]:
    """Hull of the feasible long-run payoff pairs (the four stage outcomes)."""
    sx, sy = game.sx, game.sy
    return convex_hull(zip(sx, sy))


def _clip_at_least(poly, axis: int, v: float):
    out = []
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        a_in = a[axis] >= v - 1e-12
        b_in = b[axis] >= v - 1e-12
        if a_in:
            out.append(a)
        if a_in != b_in:
            t = (v - a[axis]) / (b[axis] - a[axis])
            out.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
    deduped = []
    for p in out:
        if not deduped or abs(p[0] - deduped[-1][0]) > 1e-12 or abs(p[1] - deduped[-1][1]) > 1e-12:
            deduped.append(p)
    if len(deduped) > 1 and abs(deduped[0][0] - deduped[-1][0]) <= 1e-12 \
            and abs(deduped[0][1] - deduped[-1][1]) <= 1e-12:
        deduped.pop()
    return deduped


def folk_region(game: StageGame, threat: tuple[float, float]) -> list[tuple[float, float]]:
    """Feasible payoff pairs dominating a threat point, as a clipped polygon."""
    poly = payoff_region(game)
    poly = _clip_at_least(poly, 0, threat[0])
    poly = _clip_at_least(poly, 1, threat[1])
    return poly


def game_to_dict(game: StageGame) -> dict:
    return {
        "schema": GAME_SCHEMA,
        "name": game.name,
        "kind": game.kind,
        "sx": list(game.sx),
        "sy": list(game.sy),
    }


def game_from_dict(data: dict) -> StageGame:
    """Inverse of game_to_dict; also accepts letter forms for the named families."""
    if "sx" in data:
        return StageGame(name=str(data.get("name", "game")),
                         sx=_as4(data["sx"]), sy=_as4(data["sy"]),
                         kind=str(data.get("kind", "general")))
    kind = data.get("kind")
    name = data.get("name")
    if kind == "sexes" or set("FCLD") <= set(data):
        return battle_of_sexes(data["F"], data["C"], data["L"], data["D"],
                               name=name or "bs")
    if set("RSTP") <= set(data):
        return symmetric_game(data["R"], data["S"], data["T"], data["P"],
                              name=name or "symmetric")
    raise ValueError("game dict needs either sx/sy vectors or family letters")
