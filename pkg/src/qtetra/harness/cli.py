"""Command-line entry point: ``qtetra verify | eval | list-suites``."""

from __future__ import annotations

import argparse
import sys

from ..errors import ExprSyntaxError, QtetraError, UnknownSuite
from ..report import emit_report
from .parser import parse_expr
from .suites import SUITES, SuiteConfig, run_suite


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qtetra", description="Exact verification of tetrahedron and Yang-Baxter identities.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", help="suite name (see list-suites)")
    v.add_argument("--n", type=int, default=2, help="number of sites N (default 2)")
    v.add_argument("--order", type=int, default=None, help="total-degree cap D (default: suite default)")
    v.add_argument("--json", metavar="PATH", default=None, help="also write the JSON report to PATH")
    v.add_argument("--parallel", type=int, default=1, metavar="K", help="run up to K checks concurrently")
    v.add_argument("--verbose", action="store_true", help="show details for passing checks too")
    v.add_argument("--no-timings", action="store_true", help="report ms = 0 so reports are byte-identical")

    e = sub.add_parser("eval", help="evaluate an operator expression")
    e.add_argument("--vars", type=int, required=True, help="number of variables")
    e.add_argument("--cap", type=int, default=None, help="series cap, required when parameters appear")
    e.add_argument("--expr", action="store_true", help="print in the parseable expression syntax")
    e.add_argument("expression")

    sub.add_parser("list-suites", help="list registered suites")
    return p


def _verify(args) -> int:
    try:
        cfg = SuiteConfig(args.suite, args.n, args.order, args.parallel, args.json, args.verbose, not args.no_timings)
    except UnknownSuite:
        print(f"unknown suite {args.suite!r}; try 'qtetra list-suites'", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    report = run_suite(cfg)
    sys.stdout.write(emit_report(report, "text", verbose=cfg.verbose))
    if cfg.report_path:
        emit_report(report, "json", cfg.report_path)
    return 0 if report.passed else 1


def _eval(args) -> int:
    try:
        value = parse_expr(args.expression, args.vars, args.cap)
    except ExprSyntaxError as exc:
        print(args.expression, file=sys.stderr)
        print(" " * exc.pos + "^", file=sys.stderr)
        print(f"syntax error: {exc}", file=sys.stderr)
        return 2
    except (QtetraError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(value.to_expr() if args.expr else value)
    return 0


def _list() -> int:
    width = max(len(n) for n in SUITES)
    for name, spec in SUITES.items():
        d = "-" if not spec.uses_order or spec.build is None else f"D={spec.default_order(2)}"
        print(f"{name:<{width}}  {d:<4}  {spec.description}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return _verify(args)
    if args.command == "eval":
        return _eval(args)
    return _list()


if __name__ == "__main__":
    sys.exit(main())
