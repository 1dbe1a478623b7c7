"""Command line entry point.

Subcommands: serve a realtime session host, run headless simulations with
scripted influencer bots, analyze and render session logs, and calibrate a
configuration against the behavioural targets.

Exit codes are part of the contract: 0 success, 2 invalid input of any kind,
3 calibration finished without meeting its targets, 4 serve could not bind its
port.  Every seeded subcommand prints the seed it ran with so any output can
be reproduced from its own text.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import os
import socket
import sys

from .analytics import attribution, classify, cons_gates, summarize_session, summary_csv, summary_table
from .bots import BotSpec
from .calibrate import CalibrationTargets, calibrate, report_text
from .config import (
    LOG_DIR_ENV_VAR,
    GameConfig,
    load_config,
    resolve_config,
    save_config,
    uncalibrated_config,
)
from .errors import SlalomError
from .render import render_outcome_sequence, render_session_circle, render_tier_curves
from .runner import run_session
from .sessionlog import ParsedLog, SeedBundle, log_path, parse

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_TARGETS_UNMET = 3
EXIT_PORT_IN_USE = 4


def _default_log_dir() -> str:
    return os.environ.get(LOG_DIR_ENV_VAR, "logs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slalom", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the realtime session server")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8765)
    serve.add_argument("--config", default=None, help="config file (default: env or packaged)")
    serve.add_argument("--log-dir", default=None, help=f"session log directory (or ${LOG_DIR_ENV_VAR})")
    serve.add_argument("--tick-hz", type=float, default=0.0, help="wall-clock tick rate; 0 uses 1/dt")

    simulate = sub.add_parser("simulate", help="headless session with a scripted influencer")
    simulate.add_argument("--bot", default="static:medium", help="static[:size], sizebalancer or escort")
    simulate.add_argument("--preset", default=None, help="circle preset for the bot (none/small/medium/big)")
    simulate.add_argument("--level", type=int, default=1)
    simulate.add_argument("--seed", type=int, default=7)
    simulate.add_argument("--duration", type=float, default=60.0, help="simulated seconds per session")
    simulate.add_argument("--sessions", type=int, default=1, help="sessions to run, seeds seed..seed+n-1")
    simulate.add_argument("--jobs", type=int, default=1, help="worker processes (results identical)")
    simulate.add_argument("--config", default=None)
    simulate.add_argument("--out", default=None, help=f"log directory (or ${LOG_DIR_ENV_VAR})")

    analyze = sub.add_parser("analyze", help="summarize session logs")
    analyze.add_argument("paths", nargs="+")
    analyze.add_argument("--csv", action="store_true", help="emit CSV instead of the aligned table")
    analyze.add_argument("--per-session", action="store_true", help="trial and attribution detail per log")
    analyze.add_argument("--out", default=None, help="write the report here instead of stdout")

    render = sub.add_parser("render", help="draw a session log as a vector graphic")
    render.add_argument("paths", nargs="+")
    render.add_argument("--kind", choices=("circle", "sequence", "tiers"), required=True)
    render.add_argument("--out", required=True)

    cal = sub.add_parser("calibrate", help="search for a config meeting the behavioural targets")
    cal.add_argument("--config", default=None, help="base config (default: raw uncalibrated values)")
    cal.add_argument("--budget", type=int, default=60, help="candidates to evaluate")
    cal.add_argument("--seed", type=int, default=2024, help="search seed")
    cal.add_argument("--trial-seed", type=int, default=7, help="base seed for the scoring trials")
    cal.add_argument("--out", default=None, help="write the winning config here")

    return parser


# --- serve ----------------------------------------------------------------------


def _port_free(host: str, port: int) -> bool:
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError:
        return False
    finally:
        probe.close()
    return True


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import ServerSettings, create_app

    config = resolve_config(args.config)
    log_dir = args.log_dir if args.log_dir is not None else _default_log_dir()
    if not _port_free(args.host, args.port):
        print(f"port {args.port} on {args.host} is already in use", file=sys.stderr)
        return EXIT_PORT_IN_USE
    app = create_app(ServerSettings(config=config, log_dir=log_dir, tick_hz=args.tick_hz))
    print(f"serving on {args.host}:{args.port}, logs in {log_dir}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


# --- simulate --------------------------------------------------------------------


def _run_one_session(packed: tuple) -> tuple[int, str]:
    """Worker for --jobs: run one seeded session, return (seed, log path)."""
    config_dict, bot_text, level, seed, duration, out_dir = packed
    config = GameConfig.from_dict(config_dict)
    spec = BotSpec.parse(bot_text)
    session_id = f"{spec.kind}-{seed}"
    path = log_path(out_dir, session_id)
    run_session(
        config,
        SeedBundle.from_root(seed),
        session_id=session_id,
        duration_s=duration,
        bot=spec.build(),
        level=level,
        log_path=path,
    )
    return seed, path


def cmd_simulate(args: argparse.Namespace) -> int:
    config = resolve_config(args.config)
    bot_text = args.bot
    if args.preset is not None:
        kind = BotSpec.parse(bot_text).kind
        bot_text = f"{kind}:{args.preset}"
    BotSpec.parse(bot_text)  # validate before any work
    if args.sessions < 1:
        raise SlalomError("sessions: need at least 1")
    out_dir = args.out if args.out is not None else _default_log_dir()
    os.makedirs(out_dir, exist_ok=True)

    work = [
        (config.to_dict(), bot_text, args.level, args.seed + i, args.duration, out_dir)
        for i in range(args.sessions)
    ]
    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one_session, work))
    else:
        results = [_run_one_session(item) for item in work]

    print(f"bot: {bot_text}  level: {args.level}  duration: {args.duration:g}s  seed: {args.seed}")
    parsed_logs = []
    for seed, path in results:
        parsed_logs.append(parse(path))
        print(f"  seed {seed}: {path}")
    print(summary_table(parsed_logs), end="")
    return EXIT_OK


# --- analyze ---------------------------------------------------------------------


def _per_session_report(parsed: ParsedLog) -> str:
    row = summarize_session(parsed)
    gates = cons_gates(parsed)
    shares = attribution(parsed)
    lines = [f"session {row.session_id}", f"  played {row.played_s:.1f}s, gates {gates.total_passed} passed / {gates.total_failed} failed"]
    if gates.average_consgates is None:
        lines.append("  consecutive gates: no finished trials")
    else:
        tier = classify(gates.average_consgates)
        lines.append(
            f"  consecutive gates: avg {gates.average_consgates:.2f} over {len(gates.trials)} trials -> {tier.value}"
        )
    lines.append(
        f"  actions: model {shares.model_pct:.2f}%  influence {shares.influence_pct:.2f}%"
        f"  stochastic {shares.stochastic_pct:.2f}%"
    )
    return "\n".join(lines) + "\n"


def cmd_analyze(args: argparse.Namespace) -> int:
    parsed_logs = [parse(p) for p in args.paths]
    chunks = []
    if args.csv:
        chunks.append(summary_csv(parsed_logs))
    else:
        chunks.append(summary_table(parsed_logs))
    if args.per_session:
        chunks.extend(_per_session_report(p) for p in parsed_logs)
    text = "".join(chunks)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text, end="")
    return EXIT_OK


# --- render ----------------------------------------------------------------------


def cmd_render(args: argparse.Namespace) -> int:
    parsed_logs = [parse(p) for p in args.paths]
    if args.kind == "circle":
        if len(parsed_logs) != 1:
            raise SlalomError("render circle: exactly one log")
        svg = render_session_circle(parsed_logs[0])
    elif args.kind == "sequence":
        svg = render_outcome_sequence(parsed_logs)
    else:
        svg = render_tier_curves(parsed_logs)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(svg)
    print(f"wrote {args.out}")
    return EXIT_OK


# --- calibrate -------------------------------------------------------------------


def cmd_calibrate(args: argparse.Namespace) -> int:
    base = load_config(args.config) if args.config else uncalibrated_config()
    targets = CalibrationTargets(base_seed=args.trial_seed)
    outcome = calibrate(base, targets, budget=args.budget, search_seed=args.seed)
    print(f"search seed: {args.seed}  trial seed: {args.trial_seed}  budget: {args.budget}")
    print(report_text(outcome, targets), end="")
    if not outcome.met:
        return EXIT_TARGETS_UNMET
    if args.out:
        save_config(outcome.config, args.out)
        print(f"wrote {args.out}")
    return EXIT_OK


_COMMANDS = {
    "serve": cmd_serve,
    "simulate": cmd_simulate,
    "analyze": cmd_analyze,
    "render": cmd_render,
    "calibrate": cmd_calibrate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except SlalomError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
