"""Command-line interface: match running, matrix evaluation, replay
verification, the game service, and the external step protocol."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bots import POLICY_NAMES, ConfigurationError, make_policy
from .harness import evaluate_matrix, run_match, seeds_for_game
from .replay import verify_replay
from .scenario import ScenarioError, SubEnv, resolve_scenario

__all__ = ["main"]


def _scenario_from_args(args: argparse.Namespace):
    return resolve_scenario(f"{args.subenv}/{args.index}")


def _cmd_run(args: argparse.Namespace) -> int:
    scenario = _scenario_from_args(args)
    seeds = seeds_for_game(args.seed)
    red = make_policy(args.red, seed=seeds.red)
    blue = make_policy(args.blue, seed=seeds.blue)
    replay_path = Path(args.replay) if args.replay else None
    result = run_match(scenario, red, blue, seeds, replay_path=replay_path)
    print(f"scenario   {scenario.scenario_id}")
    print(f"policies   red={args.red} blue={args.blue}")
    print(f"seeds      engine={seeds.engine} red={seeds.red} blue={seeds.blue}")
    print(f"outcome    {result.outcome} ({result.reason})")
    print(f"ticks      {result.ticks}")
    print(f"blood      red={result.red_blood:.1f} blue={result.blue_blood:.1f}")
    print(f"digest     {result.digest}")
    if replay_path is not None:
        print(f"replay     {replay_path}")
    return 0


def _cmd_matrix(args: argparse.Namespace) -> int:
    # imported here so run/verify/protocol stay free of the plotting stack
    from .report import format_matrix_table, render_matrix_heatmap, write_matrix_csv

    scenario = _scenario_from_args(args)
    if args.policies:
        names = [p.strip() for p in args.policies.split(",") if p.strip()]
    else:
        names = [p for p in POLICY_NAMES
                 if not (p == "kai1" and scenario.subenv is SubEnv.CMAC)]
    matrix = evaluate_matrix(scenario, names, args.games, args.seed,
                             parallelism=args.parallelism)
    out = Path(args.out)
    write_matrix_csv(matrix, out)
    figure = out.with_suffix(".png")
    render_matrix_heatmap(matrix, figure)
    print(format_matrix_table(matrix))
    print(f"\nwrote {out} and {figure}")
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    path = Path(args.replay)
    result = verify_replay(path)
    if result.ok:
        print(f"ok: {path} verified over {result.ticks} ticks")
        return 0
    print(f"DIVERGED: {result.divergence}", file=sys.stderr)
    return 1


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(replay_dir=Path(args.replay_dir))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _cmd_protocol(args: argparse.Namespace) -> int:
    from .protocol import serve_stdio, serve_tcp

    if args.stdio:
        serve_stdio()
    else:
        print(f"step protocol listening on {args.host}:{args.port}",
              file=sys.stderr)
        serve_tcp(host=args.host, port=args.port)
    return 0


def _add_scenario_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--subenv", required=True,
                        choices=[s.value for s in SubEnv],
                        help="sub-environment family")
    parser.add_argument("--index", required=True, type=int,
                        help="scenario index within the sub-environment")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wgc", description="hex wargame benchmark toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="play one match between two bots")
    _add_scenario_args(run)
    run.add_argument("--red", required=True, choices=POLICY_NAMES)
    run.add_argument("--blue", required=True, choices=POLICY_NAMES)
    run.add_argument("--seed", required=True, type=int)
    run.add_argument("--replay", help="record the game to this file")
    run.set_defaults(func=_cmd_run)

    matrix = sub.add_parser(
        "matrix", help="round-robin win-rate matrix with CSV and heatmap")
    _add_scenario_args(matrix)
    matrix.add_argument("--games", required=True, type=int)
    matrix.add_argument("--seed", required=True, type=int)
    matrix.add_argument("--out", required=True,
                        help="CSV path; the heatmap lands next to it as .png")
    matrix.add_argument("--policies",
                        help="comma-separated policy names (default: all)")
    matrix.add_argument("--parallelism", type=int, default=1)
    matrix.set_defaults(func=_cmd_matrix)

    verify = sub.add_parser("verify", help="re-simulate and check a replay")
    verify.add_argument("replay")
    verify.set_defaults(func=_cmd_verify)

    serve = sub.add_parser("serve", help="HTTP/WS game service for the web UI")
    serve.add_argument("--port", required=True, type=int)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--replay-dir", default="replays")
    serve.set_defaults(func=_cmd_serve)

    protocol = sub.add_parser(
        "protocol", help="newline-delimited step protocol for trainers")
    mode = protocol.add_mutually_exclusive_group(required=True)
    mode.add_argument("--stdio", action="store_true",
                      help="speak the protocol over stdin/stdout")
    mode.add_argument("--port", type=int, help="listen on a local TCP port")
    protocol.add_argument("--host", default="127.0.0.1")
    protocol.set_defaults(func=_cmd_protocol)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
