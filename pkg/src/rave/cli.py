"""Operator command line: run sessions, validate policies, replay traces,
and host the observer gateway.

Exit codes: 0 success, 1 runtime error, 2 validation failure. Every error
additionally prints one machine-parsable line of the form
``RAVE_ERROR {"code": ..., "message": ...}`` on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from .behaviors import load_catalog
from .config import RaveConfig, load_config
from .errors import DivergenceAt, HashMismatch, RaveError
from .policy import check_policy_coverage, load_policy
from .scenario import Scenario, load_scenario
from .session import SessionResult, replay, run_session
from .trace import read_trace

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_VALIDATION = 2

_VALIDATION_CODES = {
    "PolicyIncomplete",
    "InvalidScenario",
    "PolicyInvalid",
    "ConfigInvalid",
    "CatalogInvalid",
    "UnknownLabel",
    "HashMismatch",
    "UnknownRhyme",
}


def _error(code: str, message: str) -> None:
    print(f"error: {message}", file=sys.stderr)
    print("RAVE_ERROR " + json.dumps({"code": code, "message": message}), file=sys.stderr)


def _exit_for(exc: RaveError) -> int:
    return EXIT_VALIDATION if exc.code in _VALIDATION_CODES else EXIT_RUNTIME


def _load_config(path: Optional[str]) -> RaveConfig:
    return load_config(Path(path)) if path else load_config()


def cmd_run(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    scenario = load_scenario(Path(args.scenario))
    policy = load_policy(Path(args.policy)) if args.policy else load_policy()
    report = check_policy_coverage(policy, load_catalog())
    if not report.ok:
        for combo in report.uncovered:
            print(f"uncovered: {combo}")
        _error("PolicyIncomplete", f"{len(report.uncovered)} combinations uncovered")
        return EXIT_VALIDATION
    gateway = None
    if args.gateway_port:
        if not args.realtime:
            _error("ConfigInvalid", "--gateway-port requires --realtime")
            return EXIT_VALIDATION
        from .gateway import GatewayServer

        gateway = GatewayServer(args.gateway_port, load_catalog())
        gateway.start()
    try:
        result = run_session(
            scenario,
            config=config,
            policy=policy,
            realtime=args.realtime,
            gateway=gateway,
            seed=args.seed,
        )
    finally:
        if gateway is not None:
            gateway.stop()
    if args.trace:
        content_hash = result.trace.write(Path(args.trace))
        print(f"trace written to {args.trace} (sha256 {content_hash[:12]}..)")
    _print_summary(result)
    return EXIT_OK


def _print_summary(result: SessionResult) -> None:
    print(f"session complete: scenario={result.trace.header['scenario']} "
          f"seed={result.trace.header['seed']} records={len(result.trace.records)}")
    print("episodes:")
    for kind in ("Familiarization", "NurseryRhyme", "Soothing", "AttentionGetting"):
        print(f"  {kind:<17} {result.episode_counts.get(kind, 0)}")
    print(f"interrupts handled: {result.interrupts_handled}")


def cmd_check_policy(args: argparse.Namespace) -> int:
    policy = load_policy(Path(args.policy)) if args.policy else load_policy()
    catalog = load_catalog()
    report = check_policy_coverage(policy, catalog)
    print(f"combinations: {report.baseline} baseline (aoi x readiness x behavior) "
          f"+ behavior-absent = {report.total} checks")
    print(f"covered: {report.covered}/{report.total}")
    if args.full:
        for (aoi, readiness, behavior), rule_id in sorted(report.matches.items()):
            print(f"  {aoi:<10} {readiness:<13} {behavior:<17} -> {rule_id}")
    else:
        print("rule hit counts:")
        for rule_id, count in sorted(report.rule_counts().items(), key=lambda kv: -kv[1]):
            print(f"  {rule_id:<34} {count}")
    if not report.ok:
        for combo in report.uncovered:
            print(f"uncovered: {combo}")
        _error("PolicyIncomplete", f"{len(report.uncovered)} combinations uncovered")
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_replay(args: argparse.Namespace) -> int:
    config = _load_config(args.config) if args.config else None
    report = replay(Path(args.trace), current_config=config, render=args.render)
    if not report.config_matched:
        print("warning: current config hash differs from the trace header; "
              "comparison used the trace's embedded config", file=sys.stderr)
    if args.render:
        for line in report.timeline:
            print(line)
    print(f"commands: recorded={report.recorded_commands} "
          f"regenerated={report.regenerated_commands}")
    if report.ok:
        print("replay: zero divergences")
        return EXIT_OK
    _error("DivergenceAt", f"divergence at command index {report.first_divergence}: {report.detail}")
    return EXIT_RUNTIME


def cmd_gateway(args: argparse.Namespace) -> int:
    from .gateway import GatewayServer, serve_static

    config = _load_config(args.config)
    if args.scenario:
        scenario = load_scenario(Path(args.scenario))
    else:
        scenario = Scenario(name="operator", seed=args.seed or 0,
                            duration_ms=int(args.duration * 1000))
    gateway = GatewayServer(args.port, load_catalog())
    gateway.start()
    static_server = None
    if args.serve_ui:
        ui_dir = Path(args.ui_dir)
        if not ui_dir.is_dir():
            _error("ConfigInvalid", f"console assets not found at {ui_dir}; build the frontend first")
            gateway.stop()
            return EXIT_VALIDATION
        static_server = serve_static(ui_dir, args.ui_port)
        print(f"console UI: http://127.0.0.1:{args.ui_port}/")
    print(f"gateway: ws://127.0.0.1:{args.port}/ (scenario={scenario.name}, "
          f"duration={scenario.duration_ms / 1000:.0f}s)")
    try:
        result = run_session(scenario, config=config, realtime=True, gateway=gateway,
                             seed=args.seed)
    finally:
        gateway.stop()
        if static_server is not None:
            static_server.shutdown()
    if args.trace:
        result.trace.write(Path(args.trace))
        print(f"trace written to {args.trace}")
    _print_summary(result)
    return EXIT_OK


def cmd_inspect(args: argparse.Namespace) -> int:
    trace = read_trace(Path(args.trace), verify=not args.no_verify)
    header = trace.header
    print(json.dumps({k: v for k, v in header.items() if k != "config"}, indent=2))
    print(f"records: {len(trace.records)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rave",
        description="Multiparty dialogue manager sessions, policy checks, and replay.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scripted session")
    run_p.add_argument("--scenario", required=True)
    run_p.add_argument("--config")
    run_p.add_argument("--policy")
    run_p.add_argument("--trace", help="write the session trace to this path")
    run_p.add_argument("--seed", type=int)
    mode = run_p.add_mutually_exclusive_group()
    mode.add_argument("--fast", action="store_true", default=True)
    mode.add_argument("--realtime", action="store_true")
    run_p.add_argument("--gateway-port", type=int)
    run_p.set_defaults(func=cmd_run)

    check_p = sub.add_parser("check-policy", help="check policy coverage (480 combinations)")
    check_p.add_argument("--policy")
    check_p.add_argument("--full", action="store_true", help="print the full coverage matrix")
    check_p.set_defaults(func=cmd_check_policy)

    replay_p = sub.add_parser("replay", help="verify a trace replays without divergence")
    replay_p.add_argument("--trace", required=True)
    replay_p.add_argument("--config")
    replay_p.add_argument("--render", action="store_true", help="print the timeline")
    replay_p.set_defaults(func=cmd_replay)

    gw_p = sub.add_parser("gateway", help="host a live session for the observer console")
    gw_p.add_argument("--port", type=int, default=8765)
    gw_p.add_argument("--scenario")
    gw_p.add_argument("--config")
    gw_p.add_argument("--trace")
    gw_p.add_argument("--seed", type=int)
    gw_p.add_argument("--duration", type=float, default=300.0,
                      help="session length in seconds when no scenario is given")
    gw_p.add_argument("--serve-ui", action="store_true")
    gw_p.add_argument("--ui-dir", default="frontend/dist")
    gw_p.add_argument("--ui-port", type=int, default=8080)
    gw_p.set_defaults(func=cmd_gateway)

    inspect_p = sub.add_parser("inspect", help="print a trace header")
    inspect_p.add_argument("--trace", required=True)
    inspect_p.add_argument("--no-verify", action="store_true")
    inspect_p.set_defaults(func=cmd_inspect)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RaveError as exc:
        _error(exc.code, str(exc))
        return _exit_for(exc)
    except FileNotFoundError as exc:
        _error("FileNotFound", str(exc))
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
