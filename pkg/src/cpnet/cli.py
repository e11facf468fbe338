"""Command-line entry point.

Exit codes: 0 success, 1 domain failure (invalid document, unsupported
analysis), 2 usage or I/O failure. All file I/O is UTF-8.
"""

from __future__ import annotations

import argparse
import json
import socket
import sys
from pathlib import Path
from typing import Optional

from .cpnxml import export_cpn_xml_stub, import_cpn_xml
from .errors import CpnError, ValidationFailed
from .interchange import document_text, export_json, import_json, render_dot
from .net import Net
from .simlog import export_event_log, run_simulation
from .statespace import DEFAULT_MAX_EDGES, DEFAULT_MAX_STATES, summarize


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _read_document(path: str) -> dict:
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def _write_text(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)


def _load_net(path: str):
    """Returns (net, marking, functions); hierarchies come back flattened."""
    loaded, marking, functions = import_json(_read_document(path))
    net = loaded if isinstance(loaded, Net) else marking.net
    return loaded, net, marking, functions


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        import_json(_read_document(args.net))
    except ValidationFailed as e:
        for violation in e.violations:
            print(violation)
        return 1
    print(f"OK: {args.net} is a valid net document")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    _, net, marking, _ = _load_net(args.net)
    trace = run_simulation(
        net,
        marking,
        seed=args.seed,
        max_steps=args.max_steps,
        max_clock=args.max_clock,
    )
    log = export_event_log([trace], args.format)
    if args.log is None:
        sys.stdout.write(log)
    else:
        _write_text(args.log, log)
        print(f"{len(trace.records)} firing(s), stopped on {trace.reason}; log written to {args.log}")
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    _, net, marking, _ = _load_net(args.net)
    report = summarize(
        net,
        marking,
        max_states=args.max_states,
        max_edges=DEFAULT_MAX_EDGES,
        strip_time_mode=args.strip_time,
    )
    print(json.dumps(report.to_json(), indent=2))
    return 0


_JSON_EXTS = {".json"}
_XML_EXTS = {".xml", ".cpn"}


def cmd_convert(args: argparse.Namespace) -> int:
    src = Path(args.infile).suffix.lower()
    dst = Path(args.outfile).suffix.lower()
    if src in _JSON_EXTS and dst in _XML_EXTS:
        document = _read_document(args.infile)
        _write_text(args.outfile, export_cpn_xml_stub(document))
        return 0
    if src in _XML_EXTS and dst in _JSON_EXTS:
        with open(args.infile, encoding="utf-8") as f:
            document, issues = import_cpn_xml(f.read())
        for issue in issues:
            print(f"{issue['path']}: {issue['reason']}", file=sys.stderr)
        _write_text(args.outfile, document_text(document))
        return 0
    print(
        f"error: cannot infer a conversion from {args.infile!r} to {args.outfile!r}"
        " (expected one .json side and one .xml/.cpn side)",
        file=sys.stderr,
    )
    return 2


def cmd_render(args: argparse.Namespace) -> int:
    loaded, net, marking, _ = _load_net(args.net)
    target = loaded
    dot_marking = marking if args.with_marking and isinstance(loaded, Net) else None
    _write_text(args.output, render_dot(target, dot_marking))
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    try:
        probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((args.host, args.port))
        probe.close()
    except OSError as e:
        print(f"error: cannot listen on {args.host}:{args.port}: {e}", file=sys.stderr)
        return 2
    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cpnet", description="Colored Petri net toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a net document and print a report")
    p.add_argument("net", help="net document (.json)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="run a random-policy simulation and export the log")
    p.add_argument("net", help="net document (.json)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=_positive_int, default=100)
    p.add_argument("--max-clock", type=_positive_int, default=None)
    p.add_argument("--log", default=None, help="log output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="print the state space report as JSON")
    p.add_argument("net", help="net document (.json)")
    p.add_argument("--max-states", type=_positive_int, default=DEFAULT_MAX_STATES)
    p.add_argument("--strip-time", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("convert", help="convert between .json and .xml/.cpn (stub)")
    p.add_argument("infile")
    p.add_argument("outfile")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("render", help="emit a DOT rendering")
    p.add_argument("net", help="net document (.json)")
    p.add_argument("-o", "--output", required=True, help="DOT output path")
    p.add_argument("--with-marking", action="store_true")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=_positive_int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as e:
        print(f"error: invalid JSON: {e}", file=sys.stderr)
        return 1
    except ValidationFailed as e:
        for violation in e.violations:
            print(violation, file=sys.stderr)
        return 1
    except CpnError as e:
        print(f"error [{e.code}]: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
