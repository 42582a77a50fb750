"""Command-line front end: validate, run, render, check, export.

Exit codes: 0 success or PASS, 1 validation or constraint FAIL, 2 usage
error, 3 runtime error (event limit, elaboration failure, overflow).
Set TLMFORGE_COLOR=0 to force plain output.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .codegen import CodegenError, export_tlm
from .kernel import SimulationError
from .simtime import TimeOverflowError, format_ns, parse_time
from .sysdesc import ElaborationError, elaborate, parse_description, validate_description
from .trace import (
    TraceSyntaxError,
    check_constraints,
    parse_trace,
    render_svg,
    render_text,
    write_trace,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3


def _color_enabled() -> bool:
    if os.environ.get("TLMFORGE_COLOR") == "0":
        return False
    return sys.stdout.isatty()


def _verdict(word: str) -> str:
    if not _color_enabled():
        return word
    code = "32" if word == "PASS" else "31"
    return f"\x1b[{code}m{word}\x1b[0m"


def _load_description(path: str):
    """Returns (description, exit_code); prints diagnostics on failure."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read description: {exc}", file=sys.stderr)
        return None, EXIT_USAGE
    desc, diags = parse_description(text)
    if desc is None:
        for d in diags:
            print(str(d))
        return None, EXIT_FAIL
    problems = validate_description(desc)
    if problems:
        for d in problems:
            print(str(d))
        return None, EXIT_FAIL
    return desc, EXIT_OK


def _load_trace(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read trace: {exc}", file=sys.stderr)
        return None, EXIT_USAGE
    try:
        return parse_trace(text), EXIT_OK
    except TraceSyntaxError as exc:
        print(str(exc))
        return None, EXIT_FAIL


def _cmd_validate(args) -> int:
    desc, code = _load_description(args.description)
    if desc is None:
        return code
    print(f"OK: {len(desc.cpus)} cpus, {len(desc.buses)} buses, {len(desc.modules)} modules, "
          f"{len(desc.instances)} instances, {len(desc.bindings)} bindings")
    return EXIT_OK


def _cmd_run(args) -> int:
    desc, code = _load_description(args.description)
    if desc is None:
        return code
    quantum = None
    if args.quantum is not None:
        try:
            quantum = parse_time(args.quantum)
        except (ValueError, OverflowError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
    try:
        model = elaborate(desc, quantum_ps=quantum, event_limit=args.event_limit)
        model.run()
    except (SimulationError, ElaborationError, TimeOverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    text = write_trace(model.records)
    out_path = args.trace or desc.options.trace_path
    if out_path is None:
        sys.stdout.write(text)
        return EXIT_OK
    Path(out_path).write_text(text, encoding="utf-8")
    final = max((r.end for r in model.records), default=0)
    print(f"trace written: {out_path} ({len(model.records)} records)")
    print(f"final time: {format_ns(final)} ns")
    return EXIT_OK


def _cmd_render(args) -> int:
    records, code = _load_trace(args.trace)
    if records is None:
        return code
    if args.svg is not None:
        Path(args.svg).write_text(render_svg(records), encoding="utf-8")
        print(f"svg written: {args.svg}")
        return EXIT_OK
    sys.stdout.write(render_text(records))
    return EXIT_OK


def _cmd_check(args) -> int:
    desc, code = _load_description(args.description)
    if desc is None:
        return code
    records, code = _load_trace(args.trace)
    if records is None:
        return code
    report = check_constraints(records, desc.constraints)
    for c in report.checks:
        line = str(c)
        word, rest = line.split(" ", 1)
        print(f"{_verdict(word)} {rest}")
    print(f"result: {_verdict('PASS' if report.passed else 'FAIL')}")
    return EXIT_OK if report.passed else EXIT_FAIL


def _cmd_export(args) -> int:
    desc, code = _load_description(args.description)
    if desc is None:
        return code
    try:
        bundle = export_tlm(desc)
    except (CodegenError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, text in bundle.files:
        (out_dir / name).write_text(text, encoding="utf-8")
        print(f"written: {out_dir / name}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tlmforge",
        description="Simulate component-based real-time system descriptions, "
                    "render timing diagrams, check deadlines, export TLM-2.0 sources.")
    parser.add_argument("--version", action="version", version=f"tlmforge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a description")
    p.add_argument("description")
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("run", help="simulate a description and write the trace")
    p.add_argument("description")
    p.add_argument("--trace", help="trace CSV output path (default: stdout)")
    p.add_argument("--quantum", help='global quantum override, e.g. "1us" (default: description)')
    p.add_argument("--event-limit", type=int, help="kernel event-count safety limit")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("render", help="render a trace as SVG or a text chart")
    p.add_argument("trace")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--svg", help="write an SVG timing diagram to this path")
    group.add_argument("--text", action="store_true", help="print a text chart (default)")
    p.set_defaults(fn=_cmd_render)

    p = sub.add_parser("check", help="check a trace against a description's constraints")
    p.add_argument("description")
    p.add_argument("trace")
    p.set_defaults(fn=_cmd_check)

    p = sub.add_parser("export", help="export TLM-2.0 source text")
    p.add_argument("description")
    p.add_argument("--out", required=True, help="output directory for the source bundle")
    p.set_defaults(fn=_cmd_export)
    return parser


def run_command(argv: list[str]) -> int:
    """Dispatch one invocation; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    return args.fn(args)


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))
