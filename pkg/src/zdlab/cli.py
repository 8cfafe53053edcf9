"""Command line front end.

Exit codes: 0 success, 1 usage or value errors, 2 infeasible ZD
parameters.  Every command accepts --config pointing at a JSON object
whose keys fill in flags the user left unset; explicit flags win.  Seeds
resolve as flag > config > ZDLAB_SEED environment variable > 0, so runs
are reproducible by default.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .agents import MemoryOneAgent
from .evolution import (Population, payoff_table, replicator_trajectory,
                        stable_share_omega, trajectory_to_csv)
from .games import (StageGame, canonical_game, clip_line, folk_region,
                    game_from_dict, game_to_dict, maximin, payoff_region,
                    stage_nash)
from .markov import StrategyVector, expected_payoffs
from .respond import best_response
from .simulate import (batch_average, batch_to_dict, play_iterated,
                       trace_to_dict, write_batch_csv, write_json,
                       write_trace_csv)
from .zd import (InfeasibleZDError, _parse_kv, constraint_coefficients,
                 parse_strategy_spec, recover_zd, resolve_strategy)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2

ENV_SEED = "ZDLAB_SEED"
REGION_SCHEMA = "zdlab.region/1"
STRATEGY_SCHEMA = "zdlab.strategy/1"


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad flags; reserve 2 for infeasibility."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_game(args) -> StageGame:
    if getattr(args, "game_file", None):
        with open(args.game_file) as fh:
            return game_from_dict(json.load(fh))
    return canonical_game(args.game or "pd")


def _merge_config(args) -> None:
    path = getattr(args, "config", None)
    if not path:
        return
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError("config file must hold a JSON object")
    for key, value in cfg.items():
        attr = key.replace("-", "_")
        if hasattr(args, attr) and getattr(args, attr) is None:
            setattr(args, attr, value)


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    env = os.environ.get(ENV_SEED, "").strip()
    return int(env) if env else 0


def _default(args, name, value):
    if getattr(args, name, None) is None:
        setattr(args, name, value)


def _out_stream(args):
    path = getattr(args, "out", None)
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w"), True


def _emit(args, text_lines, payload) -> None:
    stream, close = _out_stream(args)
    try:
        if getattr(args, "json", False):
            write_json(payload, stream)
        else:
            for line in text_lines:
                print(line, file=stream)
    finally:
        if close:
            stream.close()


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def _fmt_vector(vec: StrategyVector) -> str:
    return "(" + ", ".join(_fmt(p) for p in vec.probs) + ")"


# --- strategy flags -------------------------------------------------------

def _add_zd_flags(parser) -> None:
    parser.add_argument("--extortion", nargs="+", metavar="KEY=VALUE",
                        help="extortion parameters, e.g. delta=1 chi=10 phi=0.02")
    parser.add_argument("--mischief", nargs="+", metavar="KEY=VALUE",
                        help="mischief parameters, e.g. target=2 beta=-0.1")
    parser.add_argument("--linear", nargs="+", metavar="KEY=VALUE",
                        help="raw coefficients alpha=... beta=... gamma=...")


def _spec_from_flags(args, required: bool):
    groups = [("extortion", args.extortion), ("mischief", args.mischief),
              ("linear", getattr(args, "linear", None))]
    given = [(kind, items) for kind, items in groups if items is not None]
    if len(given) > 1:
        raise ValueError("give only one of --extortion, --mischief, --linear")
    if not given:
        if required:
            raise ValueError(
                "one of --extortion, --mischief or --linear is required")
        return None
    kind, items = given[0]
    return {"type": kind, **_parse_kv(items)}


# --- subcommands ----------------------------------------------------------

def cmd_synth(args) -> int:
    game = _load_game(args)
    spec = _spec_from_flags(args, required=True)
    side = args.side or "x"
    vec, disclosed = resolve_strategy(spec, game, side=side)
    linear = recover_zd(game, vec, side=side)
    payload = {
        "schema": STRATEGY_SCHEMA,
        "game": game.name,
        "side": side,
        "p": list(vec.probs),
        "first_move": vec.first_move,
        "params": disclosed,
    }
    lines = [f"game {game.name}, side {side}",
             f"p = {_fmt_vector(vec)}"]
    if linear is not None:
        payload["linear"] = {"alpha": linear.alpha, "beta": linear.beta,
                             "gamma": linear.gamma}
        lines.append(f"enforces {_fmt(linear.alpha)}*piX + {_fmt(linear.beta)}"
                     f"*piY + {_fmt(linear.gamma)} = 0")
    params = {k: v for k, v in disclosed.items() if k not in ("type", "side")}
    lines.append("params: " + ", ".join(
        f"{k}={_fmt(v) if isinstance(v, float) else v}"
        for k, v in params.items()))
    _emit(args, lines, payload)
    return EXIT_OK


def _resolve_pair(args, game):
    vec_x, disc_x = resolve_strategy(parse_strategy_spec(args.x), game, side="x")
    vec_y, disc_y = resolve_strategy(parse_strategy_spec(args.y), game, side="y")
    return vec_x, disc_x, vec_y, disc_y


def cmd_payoffs(args) -> int:
    game = _load_game(args)
    vec_x, _, vec_y, _ = _resolve_pair(args, game)
    result = expected_payoffs(vec_x, vec_y, game)
    payload = {
        "game": game.name,
        "piX": result.x,
        "piY": result.y,
        "method": result.method,
        "start_dependent": result.start_dependent,
    }
    lines = [f"piX = {result.x!r}", f"piY = {result.y!r}",
             f"method: {result.method}"]
    if result.start_dependent:
        lines.append("warning: limit depends on the opening distribution")
    for side, vec in (("x", vec_x), ("y", vec_y)):
        linear = recover_zd(game, vec, side=side)
        if linear is not None:
            residual = linear.residual(result.x, result.y)
            payload[f"residual_{side}"] = residual
            lines.append(f"{side} enforces a linear relation, "
                         f"residual {residual:.3e}")
    _emit(args, lines, payload)
    return EXIT_OK


def cmd_simulate(args) -> int:
    game = _load_game(args)
    _default(args, "iterations", 1000)
    vec_x, _, vec_y, _ = _resolve_pair(args, game)
    trace = play_iterated(vec_x, vec_y, game, int(args.iterations),
                          seed=_resolve_seed(args))
    stream, close = _out_stream(args)
    try:
        if args.format == "json":
            write_json(trace_to_dict(trace, include_outcomes=args.outcomes),
                       stream)
        else:
            write_trace_csv(trace, stream)
    finally:
        if close:
            stream.close()
    return EXIT_OK


def cmd_batch(args) -> int:
    game = _load_game(args)
    _default(args, "iterations", 1000)
    _default(args, "games", 100)
    vec_x, _, vec_y, _ = _resolve_pair(args, game)
    stats = batch_average(vec_x, vec_y, game, int(args.iterations),
                          int(args.games), seed=_resolve_seed(args))
    stream, close = _out_stream(args)
    try:
        if args.format == "json":
            write_json(batch_to_dict(stats), stream)
        else:
            write_batch_csv(stats, stream)
    finally:
        if close:
            stream.close()
    return EXIT_OK


def _bbox(points):
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    return min(xs), max(xs), min(ys), max(ys)


def _segment_json(segment):
    if segment is None:
        return None
    return [{"piX": x, "piY": y} for x, y in segment]


def _line_entry(text: str, game: StageGame, box) -> dict:
    spec = parse_strategy_spec(text)
    entry: dict = {"spec": text, "kind": spec["type"]}
    try:
        vec, disclosed = resolve_strategy(spec, game, side="x")
    except InfeasibleZDError as exc:
        entry["feasible"] = False
        entry["reason"] = str(exc)
        coeffs = _requested_coeffs(spec, game)
    else:
        entry["feasible"] = True
        entry["params"] = disclosed
        coeffs = constraint_coefficients(disclosed)
        if coeffs is None:
            linear = recover_zd(game, vec, side="x")
            if linear is None:
                raise ValueError(
                    f"strategy {text!r} enforces no linear relation")
            coeffs = (linear.alpha, linear.beta, linear.gamma)
    entry["line"] = _segment_json(clip_line(*coeffs, box))
    return entry


def _requested_coeffs(spec: dict, game: StageGame):
    """Line coefficients for an infeasible request, so it can still be drawn."""
    kind = spec["type"]
    if kind in ("extortion", "zd"):
        chi = float(spec.get("chi", 10.0))
        delta = float(spec["delta"]) if spec.get("delta") is not None \
            else maximin(game)[0]
        return 1.0, -chi, delta * (chi - 1.0)
    if kind == "mischief":
        return 0.0, 1.0, -float(spec["target"])
    return float(spec["alpha"]), float(spec["beta"]), float(spec["gamma"])


def cmd_region(args) -> int:
    game = _load_game(args)
    hull = payoff_region(game)
    box = _bbox(hull)
    threat = maximin(game)
    folk = folk_region(game, threat)
    payload = {
        "schema": REGION_SCHEMA,
        "game": game_to_dict(game),
        "hull": [{"piX": x, "piY": y} for x, y in hull],
        "folk": [{"piX": x, "piY": y} for x, y in folk],
        "maximin": {"x": threat[0], "y": threat[1]},
        "nash": [{"x_up": pt.x_up, "y_up": pt.y_up, "piX": pt.payoffs[0],
                  "piY": pt.payoffs[1], "kind": pt.kind}
                 for pt in stage_nash(game)],
        "lines": [_line_entry(text, game, box) for text in args.zd or []],
    }
    stream, close = _out_stream(args)
    try:
        write_json(payload, stream)
    finally:
        if close:
            stream.close()
    return EXIT_OK


def cmd_respond(args) -> int:
    game = _load_game(args)
    spec = _spec_from_flags(args, required=False)
    if spec is None:
        if args.opponent is None:
            raise ValueError("give --opponent or one of --extortion/--mischief")
        spec = parse_strategy_spec(args.opponent)
    vec, disclosed = resolve_strategy(spec, game, side="x")
    _default(args, "method", "grid")
    result = best_response(vec, game, method=args.method,
                           seed=_resolve_seed(args))
    payload = {
        "game": game.name,
        "opponent": disclosed,
        "method": result.method,
        "q_star": list(result.q_star.probs),
        "payoff": result.payoff,
        "indifferent": result.indifferent,
    }
    lines = [f"best response ({result.method}): q* = "
             f"{_fmt_vector(result.q_star)}",
             f"payoff {_fmt(result.payoff)}"]
    if result.indifferent:
        lines.append("opponent pins the payoff: every reply earns the same")
    _emit(args, lines, payload)
    return EXIT_OK


_POP_NAMES = ("zd", "tft", "allu", "alld", "random")


def _parse_population(text: str, game: StageGame, zd_spec: dict):
    names, vectors, shares = [], [], []
    for chunk in text.split(","):
        name, sep, share = chunk.rpartition(":")
        if not sep:
            raise ValueError(
                f"population entries need name:share, got {chunk!r}")
        name = name.strip().lower()
        if name not in _POP_NAMES:
            raise ValueError(f"unknown population member {name!r}; "
                             f"choose from {', '.join(_POP_NAMES)}")
        spec = zd_spec if name == "zd" else {"type": name}
        vec, _ = resolve_strategy(spec, game, side="x")
        names.append(name)
        vectors.append(vec)
        shares.append(float(share))
    return Population(tuple(names), tuple(vectors), tuple(shares))


def cmd_evolve(args) -> int:
    game = _load_game(args)
    _default(args, "dt", 0.01)
    _default(args, "steps", 1000)
    zd_spec = parse_strategy_spec(args.zd_spec) if args.zd_spec \
        else {"type": "zd"}
    pop = _parse_population(args.pop, game, zd_spec)
    table = payoff_table(pop.vectors, game)
    trajectory = replicator_trajectory(pop, table, dt=float(args.dt),
                                       steps=int(args.steps))
    if args.json:
        payload = {
            "game": game.name,
            "names": list(pop.names),
            "final_shares": [float(v) for v in trajectory[-1]],
            "start_dependent": bool(table.start_dependent.any()),
        }
        if len(pop.names) == 2:
            payload["omega"] = stable_share_omega(table)
        stream, close = _out_stream(args)
        try:
            write_json(payload, stream)
        finally:
            if close:
                stream.close()
        return EXIT_OK
    stream, close = _out_stream(args)
    try:
        trajectory_to_csv(trajectory, pop.names, stream)
    finally:
        if close:
            stream.close()
    return EXIT_OK


_MOVE_WORDS = {"u": 1, "up": 1, "d": 0, "down": 0}


def cmd_play(args, stdin=None, stdout=None) -> int:
    """Interactive match against a machine strategy.

    The machine's move for each round is drawn before the human's input
    is read, so it cannot depend on it; the transcript replays exactly
    under play_iterated with the same seed.
    """
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    game = _load_game(args)
    spec = parse_strategy_spec(args.opponent or "tft")
    machine_vec, disclosed = resolve_strategy(spec, game, side="y")
    agent = MemoryOneAgent(machine_vec)
    agent.reset()
    rng = np.random.default_rng(_resolve_seed(args))
    sx, sy = game.payoff_vectors()
    print(f"game {game.name}: you are X, the machine plays "
          f"{disclosed.get('name', disclosed['type'])}; "
          "enter u or d, q to quit", file=stdout)
    sum_x = sum_y = 0.0
    rounds = 0
    while True:
        # Commit the machine's move before reading the human's.  The
        # unused draw keeps the X seat's slot in the stream so a replay
        # with play_iterated consumes the same sequence.
        rng.random()
        machine_move = agent.act(rng)
        human = _read_move(stdin, stdout)
        if human is None:
            break
        outcome = 2 * (1 - human) + (1 - machine_move)
        sum_x += sx[outcome]
        sum_y += sy[outcome]
        rounds += 1
        agent.update(machine_move, human, float(sy[outcome]))
        print(f"round {rounds}: you {'u' if human else 'd'}, "
              f"machine {'u' if machine_move else 'd'} | stage "
              f"({_fmt(sx[outcome])}, {_fmt(sy[outcome])}) | average "
              f"({_fmt(sum_x / rounds)}, {_fmt(sum_y / rounds)})",
              file=stdout)
    if rounds:
        print(f"final averages after {rounds} rounds: "
              f"({_fmt(sum_x / rounds)}, {_fmt(sum_y / rounds)})",
              file=stdout)
    return EXIT_OK


def _read_move(stdin, stdout):
    while True:
        print("your move [u/d/q]:", file=stdout, flush=True)
        line = stdin.readline()
        if not line:
            return None
        word = line.strip().lower()
        if word in ("q", "quit"):
            return None
        if word in _MOVE_WORDS:
            return _MOVE_WORDS[word]
        print("enter u, d or q", file=stdout)


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    _default(args, "host", "127.0.0.1")
    _default(args, "port", 8000)
    app = create_app(state_path=args.state_file)
    uvicorn.run(app, host=args.host, port=int(args.port))
    return EXIT_OK


# --- parser ---------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="zdlab",
                     description="zero-determinant strategy laboratory")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--config", help="JSON object with flag defaults")
        p.add_argument("--game", help="pd, sh, gc or bs (default pd)")
        p.add_argument("--game-file", help="JSON file with a custom game")
        return p

    p = add("synth", cmd_synth, "build a ZD strategy from parameters")
    _add_zd_flags(p)
    p.add_argument("--side", choices=("x", "y"))
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")

    p = add("payoffs", cmd_payoffs, "exact long-run payoffs for a pair")
    p.add_argument("--x", required=True, help="strategy spec for player X")
    p.add_argument("--y", required=True, help="strategy spec for player Y")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")

    p = add("simulate", cmd_simulate, "one seeded match, running averages")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--iterations", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--outcomes", action="store_true",
                   help="include per-round outcomes in JSON output")
    p.add_argument("--out")

    p = add("batch", cmd_batch, "many seeded matches, mean trajectories")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--iterations", type=int)
    p.add_argument("--games", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")

    p = add("region", cmd_region, "payoff region geometry as JSON")
    p.add_argument("--zd", action="append", metavar="SPEC",
                   help="strategy spec whose payoff line to include; repeatable")
    p.add_argument("--out")

    p = add("respond", cmd_respond, "best memory-one reply to a strategy")
    _add_zd_flags(p)
    p.add_argument("--opponent", help="strategy spec to respond to")
    p.add_argument("--method", choices=("grid", "ascent"))
    p.add_argument("--seed", type=int)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")

    p = add("evolve", cmd_evolve, "replicator dynamics over named strategies")
    p.add_argument("--pop", required=True,
                   help="comma list of name:share, e.g. zd:0.01,allu:0.99")
    p.add_argument("--zd-spec", help="spec for the zd member "
                   "(default extortion chi=10)")
    p.add_argument("--dt", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")

    p = add("play", cmd_play, "play rounds against a machine strategy")
    p.add_argument("--opponent", help="machine strategy spec (default tft)")
    p.add_argument("--seed", type=int)

    p = add("serve", cmd_serve, "run the HTTP play service")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--state-file", help="JSON snapshot for session persistence")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _merge_config(args)
        return args.func(args)
    except SystemExit as exc:
        code = exc.code
        if code is None:
            return EXIT_OK
        return code if isinstance(code, int) else EXIT_USAGE
    except InfeasibleZDError as exc:
        if exc.feasible is not None and exc.feasible.is_empty:
            print(f"no feasible values: {exc}", file=sys.stderr)
        else:
            print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
