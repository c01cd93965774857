"""Command-line interface: ``callcheck analyze --ir FILE... --rules FILE``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .grammar import DEFAULT_TERMINATING
from .pipeline import EXIT_INPUT, AnalysisConfig, run
from .pts import DEFAULT_BUDGET
from .report import render_report


def _names(text: str) -> tuple[str, ...]:
    return tuple(n.strip() for n in text.split(",") if n.strip())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="callcheck",
                                description="Check call-order and call-convergence rules "
                                            "against textual LLVM IR.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="run the full analysis pipeline")
    a.add_argument("--ir", nargs="+", required=True, metavar="PATH",
                   help="one or more .ll files, linked by symbol name")
    a.add_argument("--rules", required=True, metavar="PATH", help="rule file")
    a.add_argument("--sensitivity", type=int, choices=(0, 1, 2), default=0,
                   help="call-site sensitivity k (default: 0)")
    a.add_argument("--entry", default="main", metavar="NAME", help="entry function")
    a.add_argument("--format", choices=("json", "text"), default="json")
    a.add_argument("--witness-out", metavar="PATH",
                   help="write violation witnesses as newline-delimited JSON")
    a.add_argument("--dot-out", metavar="DIR", help="write callgraph.dot and icfg.dot")
    a.add_argument("--grammar-out", metavar="DIR", help="write plain-text grammar dumps")
    a.add_argument("--include-dead", action="store_true",
                   help="also analyze functions unreachable from the entry")
    a.add_argument("--budget", type=int, default=DEFAULT_BUDGET, metavar="N",
                   help="points-to propagation step limit")
    a.add_argument("--terminating", type=_names, default=DEFAULT_TERMINATING,
                   metavar="NAMES", help="comma-separated process-terminating externals "
                                         "(default: exit,abort)")
    a.add_argument("--exit-policy", choices=("erase", "strict"), default="erase",
                   help="erase: failed runs (abort, exit with non-zero constant) project "
                        "to ε; strict: every truncated path keeps its events")
    a.add_argument("--context-expansion", action="store_true",
                   help="expand functions per calling context in the grammar (k >= 1)")
    a.add_argument("--timings", action="store_true",
                   help="include wall-clock phase times in the report")
    a.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="callcheck: %(levelname)s: %(message)s")
    try:
        config = AnalysisConfig(
            ir_paths=tuple(args.ir), rules_path=args.rules, sensitivity=args.sensitivity,
            entry=args.entry, format=args.format, witness_export=args.witness_out,
            dot_export=args.dot_out, grammar_export=args.grammar_out,
            include_dead=args.include_dead, terminating_externals=tuple(args.terminating),
            exit_policy=args.exit_policy, context_expansion=args.context_expansion,
            budget=args.budget, timings=args.timings)
    except ValueError as e:
        print(f"callcheck: error: {e}", file=sys.stderr)
        return EXIT_INPUT
    result = run(config)
    if result.report is None:
        print(f"callcheck: error: {result.error}", file=sys.stderr)
        return result.exit_code
    sys.stdout.buffer.write(render_report(result.report, config.format))
    sys.stdout.flush()
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
