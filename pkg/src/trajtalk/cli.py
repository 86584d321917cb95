"""Command-line entry points: one-shot apply, scenario replay, and the service.

    trajtalk apply  --traj plan.yaml --landmarks body.yaml --spec change.yaml --out new.yaml
    trajtalk replay --scenario scenario.yaml --report report.json --log-dir logs/
    trajtalk serve  --listen 127.0.0.1:8080 --backend mock
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from .files import FileFormatError, load_landmarks, load_params, load_replies, load_trajectory, save_trajectory
from .modify import apply
from .replay import load_scenario, run_scenario
from .schema import SpecParseError, clamp_spec, parse_spec
from .service import ServiceConfig, create_app
from .trajectory import DEFAULT_PROXIMITY_THRESHOLD


def _diff_summary(before, after) -> str:
    lines = ["idx   d_pos(m)    vel: before -> after    force: before -> after"]
    for i, (a, b) in enumerate(zip(before.waypoints, after.waypoints), start=1):
        moved = a.pos.distance_to(b.pos)
        lines.append(
            f"{i:>3}   {moved:8.5f}    {a.vel:7.4f} -> {b.vel:7.4f}    {a.force:7.3f} -> {b.force:7.3f}"
        )
    lines.append(
        f"duration: {before.duration:.3f} s -> {after.duration:.3f} s"
    )
    return "\n".join(lines)


def _cmd_apply(args: argparse.Namespace) -> int:
    try:
        traj = load_trajectory(args.traj)
        lms = load_landmarks(args.landmarks)
        params = load_params(args.params)
        spec_text = Path(args.spec).read_text(encoding="utf-8")
        spec = clamp_spec(parse_spec(spec_text, known_landmarks=lms.names()))
    except (FileFormatError, SpecParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        result = apply(traj, spec, lms, params)
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        save_trajectory(args.out, result)
        print(f"wrote {args.out}")
    print(_diff_summary(traj, result))
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    try:
        scenario = load_scenario(args.scenario)
        result = run_scenario(scenario)
    except FileFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = result.report()
    if args.out:
        save_trajectory(args.out, result.session.current)
        print(f"wrote final trajectory to {args.out}")
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        print(f"wrote report to {args.report}")
    if args.log_dir:
        log_dir = Path(args.log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        log_path = log_dir / (Path(args.scenario).stem + ".events.jsonl")
        log_path.write_text(
            "".join(event.to_json() + "\n" for event in result.events), encoding="utf-8"
        )
        print(f"wrote event log to {log_path}")
    print(f"mode: {report['mode']}   final phase: {report['final_phase']}")
    print(f"events: {report['event_counts']}")
    if report["latency"]:
        lat = report["latency"]
        print(
            f"latency over {lat['count']} modifications: "
            f"interpret {lat['mean_interpret_s']:.3f} s + apply {lat['mean_apply_s']:.3f} s "
            f"= {lat['mean_total_s']:.3f} s"
        )
    if report["ccdf_points"]:
        pts = ", ".join(f"({p:.3f}, {v:.3f})" for p, v in report["ccdf_points"])
        print(f"ccdf of remaining modifications: {pts}")
    print(f"final trajectory hash: {report['final_trajectory_hash']}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    replies = {}
    if args.backend == "scripted":
        if not args.replies:
            print("error: --backend scripted requires --replies", file=sys.stderr)
            return 2
        replies = load_replies(args.replies)
    try:
        params = load_params(args.params)
    except FileFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    config = ServiceConfig(
        listen=args.listen,
        backend=args.backend,
        replies=replies,
        params=params,
        prompt_path=args.prompt,
        log_dir=args.log_dir,
    )
    host, _, port = args.listen.partition(":")
    uvicorn.run(create_app(config), host=host or "127.0.0.1", port=int(port or 8080))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trajtalk", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_apply = sub.add_parser("apply", help="apply a modification YAML to a trajectory file")
    p_apply.add_argument("--traj", required=True, help="trajectory file (YAML or JSON)")
    p_apply.add_argument("--landmarks", required=True, help="landmark file")
    p_apply.add_argument("--spec", required=True, help="modification YAML file")
    p_apply.add_argument("--params", help="apply-parameter overrides file")
    p_apply.add_argument("--out", help="write the modified trajectory here")
    p_apply.add_argument(
        "--threshold", type=float, default=DEFAULT_PROXIMITY_THRESHOLD, help="landmark proximity threshold (m)"
    )
    p_apply.set_defaults(func=_cmd_apply)

    p_replay = sub.add_parser("replay", help="replay a scenario file and report analytics")
    p_replay.add_argument("--scenario", required=True, help="scenario YAML file")
    p_replay.add_argument("--out", help="write the final trajectory here")
    p_replay.add_argument("--report", help="write the JSON analytics report here")
    p_replay.add_argument("--log-dir", help="write the event log (JSONL) into this directory")
    p_replay.set_defaults(func=_cmd_replay)

    p_serve = sub.add_parser("serve", help="run the HTTP/WebSocket session service")
    p_serve.add_argument("--listen", default="127.0.0.1:8080", help="host:port to bind")
    p_serve.add_argument("--backend", choices=["mock", "scripted", "llm"], default="mock")
    p_serve.add_argument("--replies", help="replies file for the scripted backend")
    p_serve.add_argument("--params", help="apply-parameter overrides file")
    p_serve.add_argument("--prompt", help="override the main prompt asset path")
    p_serve.add_argument("--log-dir", help="append per-session event logs into this directory")
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
