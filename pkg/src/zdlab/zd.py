"""Synthesis of zero-determinant strategies.

A memory-one player can force a linear relation

    alpha * piX + beta * piY + gamma = 0

between the long-run payoffs, whatever the opponent does, by choosing a
strategy vector of the form alpha*sX + beta*sY + gamma*1 plus a fixed
offset.  Two standing families are built here in closed form: mischief
(alpha = 0), which pins the opponent's payoff to a chosen target, and
extortion, which enforces (piX - delta) = chi * (piY - delta) so that X
collects a chi-fold share of all surplus over the baseline delta.

Every family has a feasibility question: the linear combination must
land inside the unit cube.  The ranges below answer it exactly for the
symmetric families and for the battle of the sexes, where extortion
flips sign (phi < 0) and a factor chi != 1 exists only when the baseline
equals the two miscoordination payoffs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from zdlab.games import StageGame, maximin
from zdlab.markov import (
    CLAMP_TOL,
    StrategyVector,
    always_down,
    always_up,
    randomizer,
    tit_for_tat,
)

RESIDUAL_TOL = 1e-9

# the fixed offsets of the linear form: X controls its column only up to
# (1, 1, 0, 0), Y up to (1, 0, 1, 0), both in X's outcome order
_X_OFFSET = np.array([1.0, 1.0, 0.0, 0.0])
_Y_OFFSET = np.array([1.0, 0.0, 1.0, 0.0])
# Y's own-perspective vector lists the mixed outcomes in the other order
_Y_ORDER = [0, 2, 1, 3]


class InfeasibleZDError(ValueError):
    """The requested setting has no strategy inside the unit cube."""

    def __init__(self, message: str, parameter: str | None = None, feasible=None):
        super().__init__(message)
        self.parameter = parameter
        self.feasible = feasible


@dataclass(frozen=True)
class FeasibleRange:
    """Closed parameter interval [lo, hi]; scale parameters exclude 0."""

    lo: float
    hi: float
    exclude_zero: bool = False

    @classmethod
    def empty(cls) -> "FeasibleRange":
        return cls(math.inf, -math.inf)

    @property
    def is_empty(self) -> bool:
        if self.lo > self.hi:
            return True
        return self.exclude_zero and abs(self.lo) < 1e-12 and abs(self.hi) < 1e-12

    def contains(self, value: float, tol: float = 1e-9) -> bool:
        if self.is_empty:
            return False
        if self.exclude_zero and value == 0:
            return False
        return self.lo - tol <= value <= self.hi + tol

    def default_value(self) -> float:
        """Midpoint of the usable side, the half-way compromise between the bounds."""
        if self.is_empty:
            raise InfeasibleZDError("empty feasible range has no default", feasible=self)
        if not self.exclude_zero:
            return (self.lo + self.hi) / 2
        if self.hi > 1e-12:
            return self.hi / 2
        return self.lo / 2

    def describe(self) -> str:
        if self.is_empty:
            return "empty"
        left = "(0" if self.exclude_zero and self.lo == 0 else f"[{self.lo:.6g}"
        right = "0)" if self.exclude_zero and self.hi == 0 else f"{self.hi:.6g}]"
        return f"{left}, {right}"


@dataclass(frozen=True)
class ZDLinear:
    """Coefficients of the enforced relation alpha*piX + beta*piY + gamma = 0."""

    alpha: float
    beta: float
    gamma: float

    def residual(self, payoff_x: float, payoff_y: float) -> float:
        return self.alpha * payoff_x + self.beta * payoff_y + self.gamma

    @property
    def chi(self) -> float | None:
        """Extortion factor of an X-side relation, if alpha is nonzero."""
        if abs(self.alpha) < 1e-12:
            return None
        return -self.beta / self.alpha

    @property
    def baseline(self) -> float | None:
        """The payoff both sides earn where the relation meets the diagonal."""
        if abs(self.alpha + self.beta) < 1e-12:
            return None
        return -self.gamma / (self.alpha + self.beta)

    @property
    def pinned_y(self) -> float | None:
        """Opponent payoff a mischief relation fixes (alpha = 0)."""
        if abs(self.alpha) < 1e-12 and abs(self.beta) > 1e-12:
            return -self.gamma / self.beta
        return None

    @property
    def pinned_x(self) -> float | None:
        if abs(self.beta) < 1e-12 and abs(self.alpha) > 1e-12:
            return -self.gamma / self.alpha
        return None


def _side_offset(side: str) -> np.ndarray:
    if side == "x":
        return _X_OFFSET
    if side == "y":
        return _Y_OFFSET
    raise ValueError(f"side must be 'x' or 'y', got {side!r}")


def zd_from_linear(game: StageGame, alpha: float, beta: float, gamma: float,
                   side: str = "x", first_move: float = 0.5) -> StrategyVector:
    """Strategy vector enforcing alpha*piX + beta*piY + gamma = 0, if it exists."""
    sx, sy = game.payoff_vectors()
    raw = alpha * sx + beta * sy + gamma + _side_offset(side)
    for i, v in enumerate(raw):
        if v < -CLAMP_TOL or v > 1 + CLAMP_TOL:
            raise InfeasibleZDError(
                f"component {i + 1} of the zero-determinant vector is {v:.6g}, "
                f"outside [0, 1]",
                parameter="linear")
    vec = np.clip(raw, 0.0, 1.0)
    if side == "y":
        vec = vec[_Y_ORDER]
    return StrategyVector(tuple(vec), first_move=first_move)


def _scale_range(direction: np.ndarray, offset: np.ndarray) -> FeasibleRange:
    """All nonzero scales t with offset + t*direction inside the unit cube."""
    lo, hi = -math.inf, math.inf
    seen = False
    for v, c in zip(direction, offset):
        if abs(v) < 1e-15:
            continue
        seen = True
        a, b = sorted(((0 - c) / v, (1 - c) / v))
        lo = max(lo, a)
        hi = min(hi, b)
    if not seen or lo > hi:
        return FeasibleRange.empty()
    return FeasibleRange(lo, hi, exclude_zero=True)


def _symmetric_letters(game: StageGame) -> tuple[float, float, float, float]:
    if not game.is_symmetric:
        raise ValueError(f"game {game.name!r} is not symmetric")
    return game.sx


def extortion_ranges(game: StageGame, delta: float | None = None) -> FeasibleRange:
    """Feasible extortion factors chi for a given baseline (default: maximin).

    Symmetric games allow any chi >= 1 while the baseline stays between
    the two off-diagonal payoffs; pushing delta beyond them caps chi.
    The battle of the sexes admits chi != 1 only when the baseline
    coincides with both miscoordination payoffs, and there the range is
    symmetric around 1 on a log scale, reaching below it.
    """
    if delta is None:
        delta = maximin(game)[0]
    if game.kind == "sexes":
        F, C, L, D = game.sx
        if abs(C - L) <= 1e-9 and abs(delta - C) <= 1e-9:
            return FeasibleRange((delta - D) / (delta - F), (delta - F) / (delta - D))
        return FeasibleRange(1.0, 1.0)
    R, S, T, P = _symmetric_letters(game)
    lo, hi = min(P, R), max(P, R)
    if not (lo - 1e-9 <= delta <= hi + 1e-9):
        raise InfeasibleZDError(
            f"extortion baseline must lie in [{lo:.6g}, {hi:.6g}], got {delta:.6g}",
            parameter="delta", feasible=FeasibleRange(lo, hi))
    if min(S, T) - 1e-9 <= delta <= max(S, T) + 1e-9:
        return FeasibleRange(1.0, math.inf)
    if delta > max(S, T):
        return FeasibleRange(1.0, (delta - S) / (delta - T))
    return FeasibleRange(1.0, (delta - T) / (delta - S))


def extortion_direction(game: StageGame, chi: float, delta: float,
                        side: str = "x") -> np.ndarray:
    sx, sy = game.payoff_vectors()
    own, other = (sx, sy) if side == "x" else (sy, sx)
    return (own - delta) - chi * (other - delta)


def feasible_phi(game: StageGame, chi: float, delta: float | None = None,
                 side: str = "x") -> FeasibleRange:
    """Scale parameters phi that keep the extortion vector inside the unit cube."""
    if delta is None:
        delta = maximin(game)[0 if side == "x" else 1]
    direction = extortion_direction(game, chi, delta, side)
    return _scale_range(direction, _side_offset(side))


def _resolve_extortion(game: StageGame, chi: float, delta: float | None,
                       phi: float | None, side: str) -> tuple[float, float, float]:
    """Fill in defaults and validate (chi, delta, phi) against the closed ranges."""
    if delta is None:
        delta = maximin(game)[0 if side == "x" else 1]
    chi_range = extortion_ranges(game, delta)
    if chi_range.is_empty or not chi_range.contains(chi):
        raise InfeasibleZDError(
            f"extortion factor must lie in {chi_range.describe()} for "
            f"baseline {delta:.6g}, got {chi:.6g}",
            parameter="chi", feasible=chi_range)
    phi_range = feasible_phi(game, chi, delta, side)
    if phi_range.is_empty:
        raise InfeasibleZDError(
            f"no scale parameter fits the unit cube for chi={chi:.6g}, "
            f"delta={delta:.6g}",
            parameter="phi", feasible=phi_range)
    if phi is None:
        phi = phi_range.default_value()
    if not phi_range.contains(phi) or phi == 0:
        raise InfeasibleZDError(
            f"scale parameter must lie in {phi_range.describe()}, got {phi:.6g}",
            parameter="phi", feasible=phi_range)
    return chi, delta, phi


def synth_extortion(game: StageGame, chi: float, delta: float | None = None,
                    phi: float | None = None, side: str = "x") -> StrategyVector:
    """Extortion vector enforcing (pi_own - delta) = chi * (pi_other - delta).

    delta defaults to the maximin value of the extorting side, phi to the
    midpoint of its feasible interval.  Raises InfeasibleZDError with the
    violated bound when the requested factor or scale does not fit.
    """
    chi, delta, phi = _resolve_extortion(game, chi, delta, phi, side)
    alpha, beta, gamma = phi, -phi * chi, phi * delta * (chi - 1)
    if side == "y":
        alpha, beta = beta, alpha
    return zd_from_linear(game, alpha, beta, gamma, side=side)


def mischief_range(game: StageGame) -> FeasibleRange:
    """Opponent payoffs that can be pinned; empty for the battle of the sexes.

    A symmetric opponent can be held anywhere between the pure-outcome
    extremes max(S, P) and min(R, T).  In the battle of the sexes the
    unit-cube constraints contradict each other for every target, so
    nobody's payoff can be fixed unilaterally.
    """
    if game.kind == "sexes":
        return FeasibleRange.empty()
    R, S, T, P = _symmetric_letters(game)
    lo, hi = max(S, P), min(R, T)
    if lo > hi:
        return FeasibleRange.empty()
    return FeasibleRange(lo, hi)


def feasible_beta(game: StageGame, target: float, side: str = "x") -> FeasibleRange:
    """Scale parameters for the mischief vector pinning the other side to target."""
    sx, sy = game.payoff_vectors()
    other = sy if side == "x" else sx
    return _scale_range(other - target, _side_offset(side))


def _resolve_mischief(game: StageGame, target: float, beta: float | None,
                      side: str) -> tuple[float, float]:
    targets = mischief_range(game)
    if targets.is_empty:
        raise InfeasibleZDError(
            f"no opponent payoff can be pinned in game {game.name!r}",
            parameter="target", feasible=targets)
    if not targets.contains(target):
        raise InfeasibleZDError(
            f"pinned payoff must lie in {targets.describe()}, got {target:.6g}",
            parameter="target", feasible=targets)
    beta_range = feasible_beta(game, target, side)
    if beta_range.is_empty:
        raise InfeasibleZDError(
            f"no scale parameter fits the unit cube for target {target:.6g}",
            parameter="beta", feasible=beta_range)
    if beta is None:
        beta = beta_range.default_value()
    if not beta_range.contains(beta) or beta == 0:
        raise InfeasibleZDError(
            f"scale parameter must lie in {beta_range.describe()}, got {beta:.6g}",
            parameter="beta", feasible=beta_range)
    return target, beta


def synth_mischief(game: StageGame, target: float, beta: float | None = None,
                   side: str = "x") -> StrategyVector:
    """Mischief vector pinning the opponent's long-run payoff to target.

    The enforced relation has alpha = 0, so the opponent's payoff equals
    target no matter what the opponent plays; one's own payoff remains
    up for grabs.  beta defaults to the midpoint of its feasible side.
    """
    target, beta = _resolve_mischief(game, target, beta, side)
    if side == "x":
        return zd_from_linear(game, 0.0, beta, -beta * target, side="x")
    return zd_from_linear(game, beta, 0.0, -beta * target, side="y")


def recover_zd(game: StageGame, strategy, side: str = "x") -> ZDLinear | None:
    """Fit the linear form to a strategy vector; None when it is not one.

    Least squares against the span of (sX, sY, 1); a residual below
    RESIDUAL_TOL means the vector enforces the recovered relation.
    """
    probs = strategy.as_array() if isinstance(strategy, StrategyVector) \
        else np.asarray(strategy, dtype=float)
    if probs.shape != (4,):
        raise ValueError("strategy must have 4 components")
    if side == "y":
        probs = probs[_Y_ORDER]
    sx, sy = game.payoff_vectors()
    A = np.column_stack([sx, sy, np.ones(4)])
    target = probs - _side_offset(side)
    coef, *_ = np.linalg.lstsq(A, target, rcond=None)
    if np.linalg.norm(A @ coef - target) > RESIDUAL_TOL:
        return None
    return ZDLinear(float(coef[0]), float(coef[1]), float(coef[2]))


_NAMED = {
    "tft": tit_for_tat,
    "allu": always_up,
    "alld": always_down,
    "random": randomizer,
}


def resolve_strategy(spec: dict, game: StageGame, side: str = "x") \
        -> tuple[StrategyVector, dict]:
    """Build a strategy vector from a declarative spec dict.

    Returns the vector together with a disclosure dict holding the fully
    resolved parameters (defaults filled in), which is what a service or
    command line reports back.  Raises InfeasibleZDError for settings
    outside the closed-form ranges and ValueError for malformed specs.
    """
    if not isinstance(spec, dict) or "type" not in spec:
        raise ValueError("strategy spec must be a dict with a 'type' field")
    kind = spec["type"]
    if kind == "zd":
        spec = {"type": "extortion", "chi": spec.get("chi", 10.0),
                "delta": spec.get("delta"), "phi": spec.get("phi")}
        kind = "extortion"
    if kind == "extortion":
        if "chi" not in spec:
            raise ValueError("extortion spec needs a chi field")
        delta = spec.get("delta")
        phi = spec.get("phi")
        chi, delta, phi = _resolve_extortion(
            game, float(spec["chi"]),
            None if delta is None else float(delta),
            None if phi is None else float(phi), side)
        vec = synth_extortion(game, chi, delta, phi, side=side)
        return vec, {"type": "extortion", "chi": chi, "delta": delta, "phi": phi,
                     "side": side}
    if kind == "mischief":
        if "target" not in spec:
            raise ValueError("mischief spec needs a target field")
        beta = spec.get("beta")
        target, beta = _resolve_mischief(
            game, float(spec["target"]),
            None if beta is None else float(beta), side)
        vec = synth_mischief(game, target, beta, side=side)
        return vec, {"type": "mischief", "target": target, "beta": beta, "side": side}
    if kind == "linear":
        for fld in ("alpha", "beta", "gamma"):
            if fld not in spec:
                raise ValueError(f"linear spec needs an {fld} field")
        alpha, beta, gamma = (float(spec[f]) for f in ("alpha", "beta", "gamma"))
        vec = zd_from_linear(game, alpha, beta, gamma, side=side)
        linear = ZDLinear(alpha, beta, gamma)
        return vec, {"type": "linear", "alpha": alpha, "beta": beta, "gamma": gamma,
                     "chi": linear.chi, "baseline": linear.baseline, "side": side}
    if kind == "vector":
        if "probs" not in spec:
            raise ValueError("vector spec needs a probs field")
        vec = StrategyVector(tuple(float(v) for v in spec["probs"]),
                             first_move=float(spec.get("first_move", 0.5)))
        return vec, {"type": "vector", "probs": list(vec.probs),
                     "first_move": vec.first_move}
    if kind in _NAMED:
        if kind == "random":
            vec = randomizer(float(spec.get("prob", 0.5)))
        else:
            vec = _NAMED[kind]()
        return vec, {"type": "vector", "name": kind, "probs": list(vec.probs),
                     "first_move": vec.first_move}
    raise ValueError(f"unknown strategy type {kind!r}")


def parse_strategy_spec(text: str) -> dict:
    """Turn compact strategy syntax into a spec dict.

    Forms: "extortion:delta=1,chi=10", "mischief:target=2,beta=-0.1",
    "linear:alpha=...,beta=...,gamma=...", "vector:p1,p2,p3,p4[,first]",
    and bare names tft / allu / alld / random[:prob=0.3] / zd[:chi=5].
    """
    head, _, rest = text.strip().partition(":")
    head = head.strip().lower()
    if not head:
        raise ValueError("empty strategy spec")
    if head == "vector":
        parts = [p for p in rest.split(",") if p.strip()]
        if len(parts) not in (4, 5):
            raise ValueError(
                "vector spec needs four probabilities and an optional first move")
        values = [float(p) for p in parts]
        spec = {"type": "vector", "probs": values[:4]}
        if len(values) == 5:
            spec["first_move"] = values[4]
        return spec
    spec: dict = {"type": head}
    if rest.strip():
        spec.update(_parse_kv(rest.split(",")))
    return spec


def _parse_kv(items) -> dict:
    params = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ValueError(f"expected key=value, got {item!r}")
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise ValueError(f"expected a number in {item!r}") from None
    return params


def constraint_coefficients(params: dict) -> tuple[float, float, float] | None:
    """Exact (alpha, beta, gamma) on (piX, piY) for resolved ZD parameters.

    Takes the disclosure dict from resolve_strategy; None for plain
    vectors.  Y-side extortion and mischief swap seats, so the
    coefficients come back reoriented to the (piX, piY) plane.
    """
    kind = params.get("type")
    side = params.get("side", "x")
    if kind == "extortion":
        chi, delta = params["chi"], params["delta"]
        alpha, beta = (1.0, -chi) if side == "x" else (-chi, 1.0)
        return alpha, beta, delta * (chi - 1.0)
    if kind == "mischief":
        target = params["target"]
        if side == "x":
            return 0.0, 1.0, -target
        return 1.0, 0.0, -target
    if kind == "linear":
        return params["alpha"], params["beta"], params["gamma"]
    return None
