"""Command-line interface for authors and analysts.

Exit status: 0 on success, 1 on validation/compile/input errors, 2 on
usage errors.  Output is deterministic for identical inputs; only the
report subcommand can embed a timestamp, and only when asked to.
"""

from __future__ import annotations

import argparse
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import analytics, automaton, notebook, script
from .errors import MoonError

ENV_MAX_ANY = "MOON_MAX_ANY"


def _limits(args) -> automaton.CompileLimits:
    max_any = getattr(args, "max_any", None)
    if max_any is None:
        env = os.environ.get(ENV_MAX_ANY)
        if env is not None:
            try:
                max_any = int(env)
            except ValueError:
                raise MoonError(f"{ENV_MAX_ANY} must be an integer, got {env!r}")
    if max_any is None:
        return automaton.CompileLimits()
    return automaton.CompileLimits(max_any_elements=max_any)


def _load_script(args, parser: argparse.ArgumentParser) -> script.Node:
    if args.script is not None and args.script_file is not None:
        parser.error("give either an inline script or --script-file, not both")
    if args.script is not None:
        source = args.script
    elif args.script_file is not None:
        source = Path(args.script_file).read_text(encoding="utf-8")
    else:
        parser.error("a script is required (inline or --script-file)")
    return script.parse_script(source)


def _load_notebook(path: str) -> notebook.NotebookDoc:
    return notebook.parse_notebook(Path(path).read_bytes())


def _add_script_args(sub: argparse.ArgumentParser):
    sub.add_argument("script", nargs="?", help="scenario script text")
    sub.add_argument("--script-file", help="read the script from a file instead")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moon", description="Scenario scripts for guided notebook execution."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a script and print automaton size")
    _add_script_args(p)
    p.add_argument("--max-any", type=int, help="any-order group expansion limit")

    p = sub.add_parser("validate", help="check a script against a notebook")
    _add_script_args(p)
    p.add_argument("notebook", help="notebook file")

    p = sub.add_parser("export-dot", help="print the automaton as graphviz text")
    _add_script_args(p)
    p.add_argument("--max-any", type=int, help="any-order group expansion limit")
    p.add_argument(
        "--with-reexec-loops",
        action="store_true",
        help="decorate states with re-execution self-loops",
    )

    p = sub.add_parser("replay", help="replay stored log traces and print metrics")
    _add_script_args(p)
    p.add_argument("notebooks", nargs="+", help="notebook files")
    p.add_argument("--max-any", type=int, help="any-order group expansion limit")

    p = sub.add_parser("report", help="write the cohort CSV for a directory of notebooks")
    _add_script_args(p)
    p.add_argument("directory", help="directory containing notebook files")
    p.add_argument("--max-any", type=int, help="any-order group expansion limit")
    p.add_argument("--stamp", action="store_true", help="embed a generation timestamp")

    p = sub.add_parser("serve", help="start the session service")
    _add_script_args(p)
    p.add_argument("notebook", help="notebook file preloaded as the default document")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--host", default="127.0.0.1")

    return parser


def _cmd_compile(args, ast) -> int:
    dfa = automaton.compile(ast, _limits(args))
    print(f"states: {dfa.n_states}")
    print(f"transitions: {dfa.n_transitions}")
    print(f"accepting: {' '.join(dfa.label(s) for s in sorted(dfa.accepting))}")
    return 0


def _cmd_validate(args, ast) -> int:
    doc = _load_notebook(args.notebook)
    report = script.validate_script(ast, doc)
    for issue in report.issues:
        print(f"{issue.severity}: {issue.message}")
    if report.ok:
        print("ok")
        return 0
    return 1


def _cmd_export_dot(args, ast) -> int:
    dfa = automaton.compile(ast, _limits(args))
    if args.with_reexec_loops:
        dfa = automaton.decorate_reexec_loops(dfa)
    sys.stdout.write(automaton.export_dot(dfa))
    return 0


def _cmd_replay(args, ast) -> int:
    notebooks = [(Path(p).name, _load_notebook(p)) for p in args.notebooks]
    report = analytics.cohort_report(notebooks, ast, _limits(args))
    for row in report.rows:
        if row.error is not None:
            print(f"{row.id}: error: {row.error}")
        else:
            fit = "NA" if row.fitness is None else f"{row.fitness:.6f}"
            print(
                f"{row.id}: g={row.g} o={row.o} r={row.r} "
                f"fitness={fit} completeness={row.completeness}"
            )
    return 0


def _cmd_report(args, ast) -> int:
    directory = Path(args.directory)
    if not directory.is_dir():
        raise MoonError(f"not a directory: {directory}")
    paths = sorted(directory.glob("*.ipynb"))
    notebooks = [(p.name, _load_notebook(p)) for p in paths]
    report = analytics.cohort_report(notebooks, ast, _limits(args))
    stamp = datetime.now(timezone.utc).isoformat() if args.stamp else None
    sys.stdout.write(analytics.render_csv(report, stamp=stamp))
    return 0


def _cmd_serve(args, ast) -> int:
    import uvicorn

    from .service import create_app

    doc = _load_notebook(args.notebook)
    app = create_app(default_doc=doc, default_script=script.render(ast), limits=_limits(args))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


_COMMANDS = {
    "compile": _cmd_compile,
    "validate": _cmd_validate,
    "export-dot": _cmd_export_dot,
    "replay": _cmd_replay,
    "report": _cmd_report,
    "serve": _cmd_serve,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        ast = _load_script(args, parser)
        return _COMMANDS[args.command](args, ast)
    except MoonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
