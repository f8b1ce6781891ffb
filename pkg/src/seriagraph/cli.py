"""Command-line interface: ``seriagraph {count,estimate,seriate,multigroup,diagram}``.

Exit codes: 0 success, 2 bad input, 3 refused by a feasibility/scale
gate (or an infeasible estimate), 4 no valid solution.
"""
from __future__ import annotations

import argparse
import json
import sys
from decimal import Decimal, InvalidOperation
from pathlib import Path

from . import io
from .combinatorics import (ComputeBudget, all_partitions_count, estimate_time, format_count,
                            stirling2, total_multigroup_solutions, unique_seriation_count)
from .diagram import render_document
from .enumeration import (EnumerationRequest, FeasibilityRefused, default_workers,
                          feasibility_report, solve_single)
from .model import UnimodalityCriterion
from .multigroup import MultigroupConstraints, ScaleRefused, solve_agglomerative, solve_exact

EXIT_OK, EXIT_INPUT, EXIT_REFUSED, EXIT_NO_SOLUTION = 0, 2, 3, 4

TABLE_SIZES = (4, 6, 8, 10, 12, 13, 14, 15, 16, 20, 40, 60, 80, 100)
TABLE2_COLUMNS = (20, 40, 60)
TABLE2_ROWS = (3, 4, 6, 8, 10, 15, 20, 25, 30)
MAX_COUNT_N = 512


def _budget(args) -> ComputeBudget:
    return ComputeBudget(cores=args.cores, seconds_per_test=args.per_test_seconds)


def _grid(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    lines = [" | ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines.append("-+-".join("-" * w for w in widths))
    lines += [" | ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join(lines) + "\n"


def table_rows(which: int, budget: ComputeBudget | None = None) -> tuple[list[str], list[list[str]]]:
    """Header and formatted cells of one of the three solution-space tables."""
    budget = budget or ComputeBudget()
    if which == 2:
        header = ["m"] + [str(n) for n in TABLE2_COLUMNS]
        rows = [[str(m)] + [format_count(stirling2(n, m)) if m <= n / 2 else ""
                            for n in TABLE2_COLUMNS] for m in TABLE2_ROWS]
        return header, rows
    count_fn = unique_seriation_count if which == 1 else total_multigroup_solutions
    label = "Seriation Solutions" if which == 1 else "Total Solutions"
    rows = []
    for n in TABLE_SIZES:
        c = count_fn(n)
        est = estimate_time(c, budget)
        rows.append([str(n), format_count(c), format_count(est.seconds), format_count(est.years)])
    return ["N", label, "Seconds", "Years"], rows


def cmd_count(args) -> int:
    budget = _budget(args)
    if args.table:
        header, rows = table_rows(args.table, budget)
        if args.format == "json":
            print(json.dumps({"table": args.table, "header": header, "rows": rows}, indent=2))
        else:
            sys.stdout.write(_grid(header, rows))
        return EXIT_OK
    n, m = args.n, args.m
    if n is None:
        return _fail("count: give N or --table", EXIT_INPUT)
    if not 1 <= n <= MAX_COUNT_N:
        return _fail(f"count: n must lie in 1..{MAX_COUNT_N}", EXIT_INPUT)
    if m is not None:
        if not 0 <= m <= n:
            return _fail(f"count: m must lie in 0..n, got {m}", EXIT_INPUT)
        value = stirling2(n, m)
        if args.format == "json":
            print(json.dumps({"n": n, "m": m, "stirling2": value}))
        else:
            print(format_count(value, args.digits))
        return EXIT_OK

    single = unique_seriation_count(n)
    # a lone assemblage has nothing to test
    single_est = estimate_time(single if n > 1 else 0, budget)
    fields = {"n": n, "unique_seriations": single, "partitions": all_partitions_count(n),
              "seconds": single_est.seconds, "years": single_est.years}
    if n >= 2:
        multi = total_multigroup_solutions(n)
        multi_est = estimate_time(multi, budget)
        fields.update(multigroup_total=multi, multigroup_seconds=multi_est.seconds,
                      multigroup_years=multi_est.years)
    if args.format == "json":
        print(json.dumps({k: (str(v) if isinstance(v, Decimal) else v) for k, v in fields.items()},
                         indent=2))
    else:
        width = max(len(k) for k in fields)
        for key, value in fields.items():
            text = str(value) if key == "n" else format_count(value, args.digits)
            print(f"{key.ljust(width)}  {text}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    if args.n < 1:
        return _fail("estimate: n must be positive", EXIT_INPUT)
    rep = feasibility_report(args.n, _budget(args))
    if args.format == "json":
        print(json.dumps({"n": rep.n, "count": rep.count, "seconds": str(rep.estimate.seconds),
                          "years": str(rep.estimate.years), "tier": rep.tier,
                          "advisory": rep.advisory}, indent=2))
    else:
        print(f"orderings  {format_count(rep.count)}")
        print(f"seconds    {format_count(rep.estimate.seconds)}")
        print(f"years      {format_count(rep.estimate.years)}")
        print(f"tier       {rep.tier}")
        print(f"note       model-based estimate; {rep.advisory}")
    return EXIT_REFUSED if rep.tier == "infeasible" else EXIT_OK


def _criterion(args) -> UnimodalityCriterion:
    return UnimodalityCriterion(mode=args.criterion, alpha=args.alpha,
                                replicates=args.replicates, seed=args.seed)


def _emit(doc: dict, args) -> None:
    if args.format == "text":
        text = _document_text(doc)
    else:
        text = io.dumps(doc)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _document_text(doc: dict) -> str:
    lines = [f"{doc['kind']}: {len(doc['solutions'])} solution(s)"]
    for i, sol in enumerate(doc["solutions"], start=1):
        parts = []
        for g in sol["groups"]:
            mark = "" if g["valid"] else f" (score {g['score']:.6g})"
            parts.append("[" + " ".join(g["labels"]) + "]" + mark)
        lines.append(f"{i:>4}  " + " ".join(parts))
    return "\n".join(lines) + "\n"


def cmd_seriate(args) -> int:
    matrix = io.read_table(args.csv)
    criterion = _criterion(args)
    mode = args.mode.replace("-", "_")
    req = EnumerationRequest(matrix, criterion, mode, args.workers, args.override)
    budget = _budget(args)
    result = solve_single(req, budget)
    count = unique_seriation_count(matrix.n)
    doc = io.seriation_document(matrix, criterion, mode, result, count, estimate_time(count, budget))
    _emit(doc, args)
    any_valid = any(r.valid for _, r in result.solutions)
    return EXIT_OK if any_valid else EXIT_NO_SOLUTION


def cmd_multigroup(args) -> int:
    matrix = io.read_table(args.csv)
    criterion = _criterion(args)
    mode = "agglomerative" if args.mode == "heuristic" else "exact"
    cons = MultigroupConstraints(args.min_group_size, args.max_groups, mode)
    if mode == "exact":
        solutions = solve_exact(matrix, criterion, cons, override=args.override,
                                workers=args.workers, all_orderings=args.all_orderings,
                                limit=args.limit or None)
    else:
        solutions = [solve_agglomerative(matrix, criterion, cons)]
    doc = io.multigroup_document(matrix, criterion, args.mode, solutions,
                                 all_partitions_count(matrix.n))
    _emit(doc, args)
    return EXIT_OK if solutions else EXIT_NO_SOLUTION


def cmd_diagram(args) -> int:
    try:
        text = Path(args.document).read_text(encoding="utf-8")
    except OSError as exc:
        return _fail(f"diagram: {exc}", EXIT_INPUT)
    try:
        doc = io.loads(text)
    except json.JSONDecodeError as exc:
        return _fail(f"diagram: {args.document}: {exc}", EXIT_INPUT)
    try:
        out = render_document(doc, args.width)
    except ValueError as exc:
        return _fail(f"diagram: {exc}", EXIT_INPUT)
    sys.stdout.write(out)
    return EXIT_OK


def _fail(message: str, code: int) -> int:
    print(message, file=sys.stderr)
    return code


def _decimal(text: str) -> Decimal:
    try:
        value = Decimal(text)
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seriagraph",
                                     description="Deterministic frequency seriation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    budget = argparse.ArgumentParser(add_help=False)
    budget.add_argument("--cores", type=_positive, default=64)
    budget.add_argument("--per-test-seconds", type=_decimal, default=Decimal("0.005"))

    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=("json", "text"), default=None)

    solve = argparse.ArgumentParser(add_help=False)
    solve.add_argument("csv")
    solve.add_argument("--criterion", choices=("strict", "bootstrap"), default="strict")
    solve.add_argument("--alpha", type=float, default=0.05)
    solve.add_argument("--replicates", type=int, default=1000)
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--workers", type=_positive, default=None)
    solve.add_argument("--override", action="store_true",
                       help="run even beyond the feasibility/scale gate")
    solve.add_argument("--out")

    p = sub.add_parser("count", parents=[budget, fmt], help="solution-space counts")
    p.add_argument("n", type=int, nargs="?")
    p.add_argument("m", type=int, nargs="?")
    p.add_argument("--table", type=int, choices=(1, 2, 3))
    p.add_argument("--digits", type=_positive, default=2)
    p.set_defaults(func=cmd_count, default_format="text")

    p = sub.add_parser("estimate", parents=[budget, fmt], help="wall-clock feasibility")
    p.add_argument("n", type=int)
    p.set_defaults(func=cmd_estimate, default_format="text")

    p = sub.add_parser("seriate", parents=[solve, budget, fmt], help="single-group enumeration")
    p.add_argument("--mode", choices=("all-valid", "best-scoring"), default="all-valid")
    p.set_defaults(func=cmd_seriate, default_format="json")

    p = sub.add_parser("multigroup", parents=[solve, budget, fmt], help="multiple solution groups")
    p.add_argument("--mode", choices=("exact", "heuristic"), default="exact")
    p.add_argument("--min-group-size", type=_positive, default=1)
    p.add_argument("--max-groups", type=_positive, default=None)
    p.add_argument("--all-orderings", action="store_true")
    p.add_argument("--limit", type=int, default=0, help="keep only the best N exact solutions")
    p.set_defaults(func=cmd_multigroup, default_format="json")

    p = sub.add_parser("diagram", help="battleship diagram of a solution document")
    p.add_argument("document")
    p.add_argument("--width", type=_positive, default=20)
    p.set_defaults(func=cmd_diagram, default_format="text")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "format", None) is None:
        args.format = args.default_format
    if getattr(args, "workers", "absent") is None:
        try:
            args.workers = default_workers()
        except ValueError:
            return _fail("SERIAGRAPH_WORKERS must be an integer", EXIT_INPUT)
    try:
        return args.func(args)
    except io.InputError as exc:
        return _fail(str(exc), EXIT_INPUT)
    except (FeasibilityRefused, ScaleRefused) as exc:
        return _fail(str(exc), EXIT_REFUSED)
    except ValueError as exc:
        return _fail(f"{args.command}: {exc}", EXIT_INPUT)


if __name__ == "__main__":
    sys.exit(main())
