"""HTTP session service for live play against a configured strategy.

The human sits in the X seat; the machine strategy is synthesized for
the Y seat.  Each round the machine's move is drawn and stored before
the human's action is accepted, so it cannot depend on it, and the draw
order matches play_iterated exactly: a session transcript replays as an
engine match under the same seed.
"""

from __future__ import annotations

import json
import os
import secrets
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .agents import MemoryOneAgent
from .games import (OUTCOME_NAMES, StageGame, canonical_game, clip_line,
                    game_from_dict, game_to_dict, payoff_region)
from .zd import (InfeasibleZDError, constraint_coefficients,
                 parse_strategy_spec, resolve_strategy)

_ACTION_NAMES = {1: "up", 0: "down"}


class CreateSessionBody(BaseModel):
    game: str | dict = "pd"
    strategy: str | dict | None = None
    strategy_spec: str | dict | None = None
    seed: int | None = None


class MoveBody(BaseModel):
    action: str
    round: int | None = None


@dataclass
class _Session:
    id: str
    game: StageGame
    spec: dict
    disclosed: dict
    seed: int
    machine: MemoryOneAgent
    rng: np.random.Generator
    created_at: str
    committed: int = 0
    human_moves: list = field(default_factory=list)
    outcomes: list = field(default_factory=list)
    sum_x: float = 0.0
    sum_y: float = 0.0
    status: str = "active"
    last_response: dict | None = None
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def round(self) -> int:
        return len(self.human_moves)


def _normalize_spec(raw) -> dict:
    """Accept the compact string grammar or JSON spec shapes."""
    if raw is None:
        raise ValueError("strategy spec required")
    if isinstance(raw, str):
        return parse_strategy_spec(raw)
    if not isinstance(raw, dict):
        raise ValueError("strategy must be a string or an object")
    if "type" in raw:
        return dict(raw)
    for kind in ("extortion", "mischief", "linear", "vector", "zd", "random"):
        if kind in raw:
            inner = raw[kind]
            if kind == "vector" and not isinstance(inner, dict):
                return {"type": "vector", "probs": list(inner)}
            if isinstance(inner, dict):
                return {"type": kind, **inner}
            raise ValueError(f"{kind} spec must be an object")
    raise ValueError("strategy spec needs a type")


def _load_game(raw) -> StageGame:
    if isinstance(raw, dict):
        return game_from_dict(raw)
    return canonical_game(raw)


def _commit_next(sess: _Session) -> None:
    # The discarded draw is the X seat's slot in the shared stream; the
    # committed move is the Y seat's.  Same order as play_iterated.
    sess.rng.random()
    sess.committed = sess.machine.act(sess.rng)


def _build_session(sid: str, game: StageGame, spec: dict, seed: int,
                   created_at: str) -> _Session:
    vec, disclosed = resolve_strategy(spec, game, side="y")
    machine = MemoryOneAgent(vec)
    machine.reset()
    sess = _Session(id=sid, game=game, spec=spec, disclosed=disclosed,
                    seed=seed, machine=machine,
                    rng=np.random.default_rng(seed), created_at=created_at)
    _commit_next(sess)
    return sess


def _apply_move(sess: _Session, human: int) -> dict:
    machine = sess.committed
    outcome = 2 * (1 - human) + (1 - machine)
    sx, sy = sess.game.payoff_vectors()
    sess.sum_x += float(sx[outcome])
    sess.sum_y += float(sy[outcome])
    sess.human_moves.append(human)
    sess.outcomes.append(outcome)
    sess.machine.update(machine, human, float(sy[outcome]))
    _commit_next(sess)
    response = {
        "round": sess.round,
        "machine_action": _ACTION_NAMES[machine],
        "human_action": _ACTION_NAMES[human],
        "stage_payoffs": {"x": float(sx[outcome]), "y": float(sy[outcome])},
        "running_averages": {"x": sess.sum_x / sess.round,
                             "y": sess.sum_y / sess.round},
    }
    sess.last_response = response
    return response


def _constraint_view(sess: _Session) -> dict | None:
    coeffs = constraint_coefficients(sess.disclosed)
    if coeffs is None:
        return None
    hull = payoff_region(sess.game)
    xs = [p[0] for p in hull]
    ys = [p[1] for p in hull]
    segment = clip_line(*coeffs, (min(xs), max(xs), min(ys), max(ys)))
    view = {k: v for k, v in sess.disclosed.items() if k != "type"}
    view["kind"] = sess.disclosed["type"]
    view["line"] = None if segment is None else \
        [{"piX": x, "piY": y} for x, y in segment]
    return view


def _session_view(sess: _Session, full: bool = False) -> dict:
    view = {
        "session_id": sess.id,
        "status": sess.status,
        "round": sess.round,
        "game": game_to_dict(sess.game),
        "disclosed_info": sess.disclosed,
        "constraint": _constraint_view(sess),
        "region": {"hull": [{"piX": x, "piY": y}
                            for x, y in payoff_region(sess.game)]},
        "seed": sess.seed,
        "created_at": sess.created_at,
    }
    averages = None
    if sess.round:
        averages = {"x": sess.sum_x / sess.round, "y": sess.sum_y / sess.round}
    view["running_averages"] = averages
    if full:
        sx, sy = sess.game.payoff_vectors()
        view["history"] = [
            {"round": t + 1,
             "human_action": _ACTION_NAMES[sess.human_moves[t]],
             "machine_action": _ACTION_NAMES[1 - (sess.outcomes[t] & 1)],
             "outcome": OUTCOME_NAMES[sess.outcomes[t]],
             "stage_payoffs": {"x": float(sx[sess.outcomes[t]]),
                               "y": float(sy[sess.outcomes[t]])}}
            for t in range(sess.round)]
    return view


class _Store:
    """In-memory sessions plus an optional JSON snapshot for restarts.

    Snapshots hold only (game, spec, seed, moves, status); a loaded
    session is rebuilt by replaying its moves, which reproduces the RNG
    and agent state exactly.
    """

    def __init__(self, state_path: str | None = None):
        self.state_path = state_path
        self.lock = threading.Lock()
        self.sessions: dict[str, _Session] = {}
        if state_path and os.path.exists(state_path):
            self._load()

    def create(self, game: StageGame, spec: dict, seed: int | None) -> _Session:
        if seed is None:
            seed = secrets.randbits(63)
        sid = secrets.token_urlsafe(16)
        sess = _build_session(sid, game, spec, seed,
                              datetime.now(timezone.utc).isoformat())
        with self.lock:
            self.sessions[sid] = sess
        self.save()
        return sess

    def get(self, sid: str) -> _Session:
        with self.lock:
            sess = self.sessions.get(sid)
        if sess is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return sess

    def save(self) -> None:
        if not self.state_path:
            return
        with self.lock:
            data = {"sessions": [self._snapshot(s)
                                 for s in self.sessions.values()]}
        tmp = f"{self.state_path}.tmp"
        with open(tmp, "w") as fh:
            json.dump(data, fh)
        os.replace(tmp, self.state_path)

    @staticmethod
    def _snapshot(sess: _Session) -> dict:
        return {"id": sess.id, "game": game_to_dict(sess.game),
                "spec": sess.spec, "seed": sess.seed,
                "human_moves": list(sess.human_moves),
                "status": sess.status, "created_at": sess.created_at}

    def _load(self) -> None:
        with open(self.state_path) as fh:
            data = json.load(fh)
        for entry in data.get("sessions", []):
            sess = _build_session(entry["id"], game_from_dict(entry["game"]),
                                  entry["spec"], entry["seed"],
                                  entry["created_at"])
            for move in entry["human_moves"]:
                _apply_move(sess, move)
            sess.status = entry["status"]
            self.sessions[sess.id] = sess


def create_app(state_path: str | None = None,
               cors_origins=("*",)) -> FastAPI:
    store = _Store(state_path)
    app = FastAPI(title="zdlab play service")
    app.state.store = store
    app.add_middleware(CORSMiddleware, allow_origins=list(cors_origins),
                       allow_methods=["*"], allow_headers=["*"])

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        raw = body.strategy if body.strategy is not None else body.strategy_spec
        try:
            game = _load_game(body.game)
            spec = _normalize_spec(raw)
            sess = store.create(game, spec, body.seed)
        except InfeasibleZDError as exc:
            empty = exc.feasible is not None and exc.feasible.is_empty
            prefix = "no feasible values" if empty else "infeasible"
            raise HTTPException(status_code=400,
                                detail=f"{prefix}: {exc}") from exc
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return _session_view(sess)

    @app.post("/sessions/{sid}/moves")
    def post_move(sid: str, body: MoveBody):
        if body.action not in ("up", "down"):
            raise HTTPException(status_code=422,
                                detail="action must be 'up' or 'down'")
        sess = store.get(sid)
        with sess.lock:
            if sess.status != "active":
                raise HTTPException(status_code=409, detail="session closed")
            if body.round is not None and body.round != sess.round + 1:
                if (body.round == sess.round and sess.last_response is not None
                        and sess.last_response["human_action"] == body.action):
                    return sess.last_response
                raise HTTPException(
                    status_code=409,
                    detail=f"round mismatch: expected {sess.round + 1}")
            response = _apply_move(sess, 1 if body.action == "up" else 0)
        store.save()
        return response

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        sess = store.get(sid)
        with sess.lock:
            return _session_view(sess, full=True)

    @app.post("/sessions/{sid}/close")
    def close_session(sid: str):
        sess = store.get(sid)
        with sess.lock:
            sess.status = "closed"
            view = {"session_id": sess.id, "status": sess.status,
                    "round": sess.round}
        store.save()
        return view

    @app.get("/games")
    def list_games():
        games = []
        for name in ("pd", "sh", "gc", "bs"):
            game = canonical_game(name)
            games.append({
                "name": name,
                "game": game_to_dict(game),
                "hull": [{"piX": x, "piY": y}
                         for x, y in payoff_region(game)],
            })
        return {"games": games}

    return app
