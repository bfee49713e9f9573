"""
Command-line front end: asc {greedy,eval,opt,check,sweep,search,dump}.

Exit codes: 0 success, 1 failed axiom check, 2 usage or input error.
"""

import argparse
import csv
import io
import json
import logging
import os
import sys
from typing import List, Optional, Sequence

from checker import check_all
from exceptions import AscError
from instance_io import builtin_instance, dump_instance, gap_greedy_cost, gap_optimal_cost, load_instance
from models import CheckReport, TieBreak, grid_points
from optimal import extract_policy, optimal_cost
from policy import all_zeros_path, build_greedy_tree, expected_cost, fixed_order_tree, greedy_trace, render_tree
from search import DEFAULT_STEP, WorstCaseSearch, sweep

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

SEARCH_CSV_COLUMNS = ["trigger_sets", "p_star", "greedy_cost", "opt_cost", "rho", "tiebreak"]
SWEEP_CSV_COLUMNS = ["p", "greedy", "opt", "rho"]


def fmt(value: float) -> str:
    """12 significant digits."""
    return f"{value:.12g}"


def _round(value):
    if isinstance(value, float):
        return float(fmt(value))
    if isinstance(value, dict):
        return {k: _round(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_round(v) for v in value]
    return value


def _emit_json(document) -> None:
    print(json.dumps(_round(document), indent=2))


def _write_csv(rows: List[dict], columns: Sequence[str], path: Optional[str]) -> None:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: fmt(row[c]) if isinstance(row[c], float) else row[c] for c in columns})
    if path:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(buffer.getvalue())
    else:
        sys.stdout.write(buffer.getvalue())


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _item_list(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="Emit a single JSON document.")
    common.add_argument("--verbose", action="store_true", help="Debug logging on stderr.")

    source = argparse.ArgumentParser(add_help=False)
    group = source.add_mutually_exclusive_group(required=True)
    group.add_argument("--instance", help="Path to an instance JSON file.")
    group.add_argument("--builtin", help="Built-in instance name (paper).")
    source.add_argument("--p", type=float, default=None, help="Override p; dummy costs follow it.")

    parser = argparse.ArgumentParser(prog="asc", description="Exact analysis of min-cost adaptive-submodular cover.")
    verbs = parser.add_subparsers(dest="verb", required=True)

    greedy = verbs.add_parser("greedy", parents=[common, source], help="Adaptive greedy policy.")
    greedy.add_argument("--priority", help="Tie-break priority, e.g. c,a,b,d (default: file order).")
    greedy.add_argument("--trace", action="store_true", help="Print greedy ratios along the all-zeros path.")

    evaluate = verbs.add_parser("eval", parents=[common, source], help="Fixed-order policy cost.")
    evaluate.add_argument("--order", required=True, help="Selection order, e.g. a,b,d.")

    opt = verbs.add_parser("opt", parents=[common, source], help="Exact optimal policy.")
    opt.add_argument("--show-tree", action="store_true")

    check = verbs.add_parser("check", parents=[common], help="Verify the cover axioms.")
    check_source = check.add_mutually_exclusive_group(required=True)
    check_source.add_argument("--instance")
    check_source.add_argument("--builtin")
    check.add_argument("--p", type=float, default=None, help="Check at this p (checked first with --grid).")
    check.add_argument("--grid", type=_positive_int, default=None,
                       help="Check at p = i/(grid+1), i = 1..grid.")

    sweep_parser = verbs.add_parser("sweep", parents=[common, source], help="Ratio over a p grid.")
    sweep_parser.add_argument("--grid", type=_positive_int, default=99)
    sweep_parser.add_argument("--csv", default=None, help="CSV output path (default: stdout).")
    tie = sweep_parser.add_mutually_exclusive_group()
    tie.add_argument("--priority")
    tie.add_argument("--adversarial", action="store_true")

    search = verbs.add_parser("search", parents=[common], help="Worst-case family search.")
    search.add_argument("--k", type=int, required=True)
    search.add_argument("--n", type=int, required=True)
    search.add_argument("--top", type=_positive_int, default=10)
    search.add_argument("--csv", default=None)
    search.add_argument("--step", type=float, default=DEFAULT_STEP)

    verbs.add_parser("dump", parents=[common, source], help="Print the instance JSON.")
    return parser


def _configure_logging(verbose: bool) -> None:
    level = logging.DEBUG
    if not verbose:
        level = getattr(logging, os.environ.get("ASC_LOG_LEVEL", "WARNING").upper(), logging.WARNING)
    logging.basicConfig(format="%(asctime)s |%(levelname)s: %(message)s", level=level, stream=sys.stderr)


def _instance(args):
    if args.instance:
        return load_instance(args.instance, args.p)
    return builtin_instance(args.builtin, args.p)


def _closed_forms(args, instance) -> dict:
    if not args.builtin:
        return {}
    opt, greedy = gap_optimal_cost(instance.p), gap_greedy_cost(instance.p)
    return {"closed_form": {"opt": opt, "greedy": greedy, "rho": greedy / opt}}


def _cmd_greedy(args) -> int:
    instance = _instance(args)
    tiebreak = TieBreak.from_string(args.priority) if args.priority else TieBreak.default_for(instance)
    tree = build_greedy_tree(instance, tiebreak)
    cost = expected_cost(instance, tree)
    path = all_zeros_path(tree)
    trace = greedy_trace(instance, tiebreak) if args.trace else []
    if args.json:
        _emit_json({
            "p": instance.p, "priority": list(tiebreak.priority), "tree": tree.to_dict(),
            "all_zeros_path": path, "expected_cost": cost,
            "trace": [{"psi": s.psi.to_list(), "ratios": s.ratios, "chosen": s.chosen} for s in trace],
            **_closed_forms(args, instance),
        })
        return EXIT_OK
    print(render_tree(tree))
    print("all-zeros path: " + " ".join(path))
    print("expected cost: " + fmt(cost))
    for step in trace:
        ratios = " ".join(f"{e}={fmt(r)}" for e, r in step.ratios.items())
        print(f"psi={step.psi} {ratios} -> {step.chosen}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    instance = _instance(args)
    order = _item_list(args.order)
    cost = expected_cost(instance, fixed_order_tree(instance, order))
    if args.json:
        _emit_json({"p": instance.p, "order": order, "expected_cost": cost, **_closed_forms(args, instance)})
    else:
        print("order: " + " ".join(order))
        print("expected cost: " + fmt(cost))
    return EXIT_OK


def _cmd_opt(args) -> int:
    instance = _instance(args)
    value, table = optimal_cost(instance)
    tree = extract_policy(table, instance)
    ties = {str(psi): list(items) for psi, items in table.tied_states().items()}
    if args.json:
        document = {"p": instance.p, "optimal_cost": value, "tied_states": ties}
        if args.show_tree:
            document["tree"] = tree.to_dict()
        _emit_json(document)
        return EXIT_OK
    print("optimal cost: " + fmt(value))
    for psi, items in sorted(ties.items()):
        print(f"tie at {psi}: {' '.join(items)}")
    if args.show_tree:
        print(render_tree(tree))
    return EXIT_OK


def _cmd_check(args) -> int:
    instance = _instance(args)
    points = [instance.p] if args.p is not None or not args.grid else []
    if args.grid:
        points += [p for p in grid_points(args.grid) if p not in points]
    combined = CheckReport()
    failing_p = None
    for p in points:
        report = check_all(instance.with_p(p))
        if failing_p is None and report.witness is not None:
            failing_p = p
        combined = CheckReport(
            monotone=(combined.monotone is not False) and report.monotone,
            coverable=(combined.coverable is not False) and report.coverable,
            adaptive_submodular=(combined.adaptive_submodular is not False) and report.adaptive_submodular,
            witness=combined.witness or report.witness,
            pairs_checked=combined.pairs_checked + report.pairs_checked,
        )
    if args.json:
        document = combined.to_dict()
        document["grid"] = points
        document["failing_p"] = failing_p
        _emit_json(document)
    else:
        for name in ("monotone", "coverable", "adaptive_submodular"):
            print(f"{name}: {'PASS' if getattr(combined, name) else 'FAIL'}")
        if combined.witness is not None:
            witness = dict(combined.witness.to_dict(), p=failing_p)
            print(json.dumps(_round(witness), sort_keys=True))
    return EXIT_OK if combined.passed else EXIT_CHECK_FAILED


def _cmd_sweep(args) -> int:
    instance = _instance(args)
    tiebreak = TieBreak.from_string(args.priority) if args.priority else None
    rows = sweep(instance, grid_points(args.grid), tiebreak, adversarial=args.adversarial)
    if args.json:
        _emit_json({"rows": rows})
    else:
        _write_csv(rows, SWEEP_CSV_COLUMNS, args.csv)
    return EXIT_OK


def _cmd_search(args) -> int:
    reports = WorstCaseSearch(step=args.step).search_worst(args.k, args.n)
    rows = [report.to_dict() for report in reports]
    if args.csv:
        _write_csv(rows, SEARCH_CSV_COLUMNS, args.csv)
    top = rows[:args.top]
    if args.json:
        _emit_json({"reports": top, "members": len(rows)})
    else:
        for row in top:
            print(" ".join(f"{c}={fmt(row[c]) if isinstance(row[c], float) else row[c]}"
                           for c in SEARCH_CSV_COLUMNS))
    return EXIT_OK


def _cmd_dump(args) -> int:
    print(dump_instance(_instance(args)))
    return EXIT_OK


COMMANDS = {
    "greedy": _cmd_greedy,
    "eval": _cmd_eval,
    "opt": _cmd_opt,
    "check": _cmd_check,
    "sweep": _cmd_sweep,
    "search": _cmd_search,
    "dump": _cmd_dump,
}


def run(argv: Sequence[str]) -> int:
    """
    Parses arguments and runs one verb.

    Returns:
        int: Process exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as e:
        return int(e.code or 0)
    _configure_logging(getattr(args, "verbose", False))
    try:
        return COMMANDS[args.verb](args)
    except FileNotFoundError as e:
        print(f"asc: error: file not found: {e.filename}", file=sys.stderr)
    except AscError as e:
        print(f"asc: error: {e}", file=sys.stderr)
    return EXIT_USAGE
