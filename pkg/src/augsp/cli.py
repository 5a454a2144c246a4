"""Command line front end.

    augsp verify --rule fstar --grid-uniform 3 --agents 3 --axiom efficiency
    augsp enumerate --grid-uniform 2 --agents 3 --require onto,pairwise_sp
    augsp scenario --all
    augsp count --grid-uniform 4

JSON goes to ``--out`` or stdout, a short summary to stderr.  Exit status is
0 when every verdict or assertion passes, 1 when one fails, 2 on usage and
guard errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from augsp import axioms
from augsp.domain import Grid
from augsp.harness import SCENARIOS, run_scenario
from augsp.rules import DefaultDictator, Rule, TargetDefault, WgspExample, load_table_file
from augsp.search import SearchSpec, classify_rules, enumerate_rules

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--grid", help="comma-separated grid values, e.g. 0,1/2,1")
    g.add_argument("--grid-uniform", type=int, metavar="M", help="M evenly spaced points on [0,1]")
    p.add_argument("--agents", type=int, help="number of agents (default 3)")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.add_argument("--workers", type=int, default=1, help="worker processes (results do not depend on it)")
    p.add_argument("--force", action="store_true", help="override the search tractability guard")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="augsp", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="check axioms for one rule")
    v.add_argument("--rule", required=True, choices=["target", "fd", "fstar", "table"])
    v.add_argument("--x", help="target level (grid value)")
    v.add_argument("--y", help="default level (grid value)")
    v.add_argument("--file", help="table file: one outcome per line in profile-id order")
    which = v.add_mutually_exclusive_group()
    which.add_argument("--axiom", help=f"one of {', '.join(axioms.AXIOMS)} (gsp:k / wgsp:k allowed)")
    which.add_argument("--all", action="store_true", help="run every checker (default)")
    v.add_argument("--max-coalition", type=int, help="coalition bound for gsp/wgsp")
    v.add_argument("--timings", action=argparse.BooleanOptionalAction, default=True,
                   help="include elapsed_ms per verdict")

    e = sub.add_parser("enumerate", parents=[common], help="enumerate tables satisfying axioms")
    e.add_argument("--require", default="", help="comma-separated axioms every table must pass")
    e.add_argument("--forbid", default="", help="comma-separated axioms every table must fail")
    e.add_argument("--limit", type=int, help="stop after this many tables")

    s = sub.add_parser("scenario", parents=[common], help="reproduce the published results")
    which = s.add_mutually_exclusive_group(required=True)
    which.add_argument("--name", choices=list(SCENARIOS))
    which.add_argument("--all", action="store_true")
    s.add_argument("--timings", action="store_true", help="include elapsed_ms (breaks byte-identical reports)")

    sub.add_parser("count", parents=[common], help="number of admissible preferences (and profiles with --agents)")
    return parser


def _grid(args) -> Grid:
    try:
        if args.grid is not None:
            return Grid.parse(args.grid)
        if args.grid_uniform is not None:
            return Grid.uniform(args.grid_uniform)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return Grid.uniform(3)


def _agents(args, default: int = 3) -> int:
    n = default if args.agents is None else args.agents
    if n < 2:
        raise UsageError("need at least two agents")
    return n


def _rule(args, grid: Grid, n: int) -> Rule:
    try:
        if args.rule == "target":
            if args.x is None or args.y is None:
                raise UsageError("--rule target needs --x and --y")
            return TargetDefault(grid, n, grid.index_of(args.x), grid.index_of(args.y))
        if args.rule == "fd":
            return DefaultDictator(grid, n)
        if args.rule == "fstar":
            return WgspExample(grid, n)
        if not args.file:
            raise UsageError("--rule table needs --file")
        return load_table_file(args.file, grid, n)
    except (ValueError, OSError) as exc:
        raise UsageError(str(exc)) from None


def _emit(args, payload) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _split(text: str) -> list[str]:
    return [t for t in (s.strip() for s in text.split(",")) if t]


def cmd_verify(args) -> int:
    grid, n = _grid(args), _agents(args)
    rule = _rule(args, grid, n)
    try:
        if args.axiom:
            verdicts = [axioms.check(rule, args.axiom, workers=args.workers, max_coalition=args.max_coalition)]
        else:
            verdicts = axioms.check_all(rule, workers=args.workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ok = all(v.passed for v in verdicts)
    _emit(args, {
        "rule": rule.to_json(),
        "grid": [grid.fmt(a) for a in range(grid.m)],
        "agents": n,
        "verdicts": [v.to_json(timing=args.timings) for v in verdicts],
        "pass": ok,
    })
    for v in verdicts:
        print(f"{v.name:18s} {'pass' if v.passed else 'FAIL'}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_enumerate(args) -> int:
    grid, n = _grid(args), _agents(args)
    try:
        spec = SearchSpec(
            grid, n, frozenset(_split(args.require)), frozenset(_split(args.forbid)),
            limit=args.limit, force=args.force,
        )
        t0 = time.perf_counter()
        tables = enumerate_rules(spec, workers=args.workers)
    except ValueError as exc:  # includes SearchGuardError
        raise UsageError(str(exc)) from None
    elapsed = time.perf_counter() - t0
    _emit(args, {
        "grid": [grid.fmt(a) for a in range(grid.m)],
        "agents": n,
        "required": sorted(spec.required),
        "forbidden": sorted(spec.forbidden),
        "limit": spec.limit,
        "count": len(tables),
        "rules": [[grid.fmt(v) for v in t.outcomes] for t in tables],
        "classification": classify_rules(tables),
    })
    print(f"{len(tables)} tables in {elapsed:.2f}s", file=sys.stderr)
    return EXIT_OK


def cmd_scenario(args) -> int:
    names = list(SCENARIOS) if args.all else [args.name]
    reports = []
    for name in names:
        report = run_scenario(name, workers=args.workers)
        reports.append(report)
        bad = sum(not a.passed for a in report.assertions)
        print(
            f"{name:16s} {'pass' if report.passed else 'FAIL'} "
            f"({len(report.assertions) - bad}/{len(report.assertions)} assertions, {report.elapsed_ms:.0f} ms)",
            file=sys.stderr,
        )
    ok = all(r.passed for r in reports)
    _emit(args, {"scenarios": [r.to_json(timing=args.timings) for r in reports], "pass": ok})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_count(args) -> int:
    grid = _grid(args)
    if args.agents is None:
        _emit(args, grid.size)
    else:
        n = _agents(args)
        _emit(args, {"preferences": grid.size, "profiles": grid.size**n})
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "enumerate": cmd_enumerate, "scenario": cmd_scenario, "count": cmd_count}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.workers < 1:
        print("augsp: --workers must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"augsp: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
