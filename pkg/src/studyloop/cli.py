"""Command-line entry points: course conversion, log analytics, service."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analysis
from .course import (
    convert_course,
    load_invideo_course,
    load_manifest,
    save_manifest,
    validate_manifest,
)


def _cmd_convert(args: argparse.Namespace) -> int:
    src = load_invideo_course(args.input)
    manifest = convert_course(src)
    violations = validate_manifest(manifest)
    if violations:
        for v in violations:
            print(f"violation: {v}", file=sys.stderr)
        return 1
    save_manifest(manifest, args.output)
    print(
        f"wrote {args.output}: {len(manifest.videos)} videos, "
        f"{len(manifest.segments)} segments, {len(manifest.questions)} questions"
    )
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    manifest = load_manifest(args.manifest)
    violations = validate_manifest(manifest)
    if violations:
        for v in violations:
            print(f"violation: {v}")
        return 1
    print(f"{args.manifest}: ok")
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    specs = analysis.load_video_specs(args.course)
    result = analysis.analyze_directory(
        args.logs,
        specs,
        merge_threshold_ms=args.merge_threshold_ms,
        quiz_window_s=args.quiz_window_s,
        finished_fraction=args.finished_fraction,
    )
    report_path = analysis.write_report(result, args.out, figures=not args.no_figures)
    print(json.dumps(analysis.analysis_to_dict(result)["overall"], indent=2, sort_keys=True))
    print(f"report written to {report_path}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .api import create_app
    from .service import load_service_config, service_from_config

    cfg = load_service_config(args.config)
    service = service_from_config(cfg)
    app = create_app(service, ui_dir=str(cfg.ui_dir) if cfg.ui_dir else None)
    try:
        uvicorn.run(app, host=cfg.listen_host, port=cfg.listen_port)
    finally:
        service.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="studyloop",
        description="Quiz-driven lecture study engine and seek-chain log analytics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    convert = sub.add_parser(
        "convert", help="convert an in-video-quiz course file to a course manifest"
    )
    convert.add_argument("--input", "-i", required=True, type=Path)
    convert.add_argument("--output", "-o", required=True, type=Path)
    convert.set_defaults(func=_cmd_convert)

    validate = sub.add_parser("validate", help="check a course manifest's invariants")
    validate.add_argument("manifest", type=Path)
    validate.set_defaults(func=_cmd_validate)

    analyze = sub.add_parser(
        "analyze", help="compute seek-chain statistics from a directory of event logs"
    )
    analyze.add_argument("--logs", required=True, type=Path, help="directory of session .jsonl files")
    analyze.add_argument(
        "--course",
        required=True,
        type=Path,
        help="in-video course file or course manifest (for durations and quiz positions)",
    )
    analyze.add_argument("--out", required=True, type=Path, help="output directory")
    analyze.add_argument("--merge-threshold-ms", type=int, default=5000)
    analyze.add_argument("--quiz-window-s", type=int, default=10)
    analyze.add_argument("--finished-fraction", type=float, default=0.9)
    analyze.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    analyze.set_defaults(func=_cmd_analyze)

    serve = sub.add_parser("serve", help="run the study-session HTTP service")
    serve.add_argument("--config", required=True, type=Path)
    serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
