"""Command-line front end.

Exit codes: 0 success, 1 infeasible parameters or bound violation, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from .bound import BoundParams, InfeasibleError, center_quantities, check_feasibility, compute_bounds
from .optimizer import DEFAULT_STEP, NoFeasibleCandidate, bound_function, format_row, make_table
from .ranges import TAU1_RULES
from .verifier import DiscreteDistribution, ci_terms, parse_atoms, verify_bound

TABLE_COLUMNS = ("t", "tau", "b", "C", "C_over_t3", "nagaev")


def _finite(obj):
    # JSON has no inf/nan; overflowed margins are reported as null
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def _dump(record: dict, out=None) -> None:
    out = out or sys.stdout
    json.dump(_finite(record), out, indent=2, allow_nan=False)
    out.write("\n")


def _add_grid_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tau-step", type=float, default=DEFAULT_STEP)
    p.add_argument("--b-step", type=float, default=DEFAULT_STEP)
    p.add_argument("--tau1-rule", choices=TAU1_RULES, default="sequential",
                   help="how the lower tau limit uses b (default: sequential)")


def _check_steps(p: argparse.ArgumentParser, args) -> None:
    if not (args.tau_step > 0 and args.b_step > 0):
        p.error("--tau-step and --b-step must be positive")


def t_range(t_min: float, t_max: float, t_step: float) -> list[float]:
    if not t_step > 0:
        raise ValueError("--t-step must be positive")
    n = int(math.floor((t_max - t_min) / t_step + 1e-9))
    return [round(t_min + k * t_step, 10) for k in range(n + 1)]


# ---------------------------------------------------------------------------

def cmd_eval(args, parser) -> int:
    try:
        params = BoundParams(args.t, args.tau, args.b)
    except ValueError as exc:
        parser.error(str(exc))
    q = center_quantities(params)
    report = check_feasibility(params, q, tau1_rule=args.tau1_rule)
    record = {
        "command": "eval",
        "inputs": {"t": params.t, "tau": params.tau, "b": params.b, "tau1_rule": args.tau1_rule},
    }
    if args.explain or not report.feasible:
        record["feasibility"] = report.as_dict()
    if args.explain:
        record["center_quantities"] = q.as_dict()
    try:
        result = compute_bounds(params, q, report)
    except InfeasibleError as exc:
        record["results"] = None
        _dump(record)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    record["results"] = result.as_dict()
    _dump(record)
    return 0


def _table_text(rows, fmt: str) -> str:
    if fmt == "json":
        payload = [
            {"t": r.t, "tau": r.tau, "b": r.b, "C": r.c_value, "C_over_t3": r.c_over_t3,
             "nagaev": r.nagaev, "feasible": r.feasible}
            for r in rows
        ]
        return json.dumps(_finite(payload), indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter="," if fmt == "csv" else "\t", lineterminator="\n")
    writer.writerow(TABLE_COLUMNS)
    for r in rows:
        cells = format_row(r)
        writer.writerow([cells[c] for c in TABLE_COLUMNS])
    return buf.getvalue()


def cmd_table(args, parser) -> int:
    _check_steps(parser, args)
    ts = list(args.t or [])
    if args.t_min is not None or args.t_max is not None:
        if args.t_min is None or args.t_max is None:
            parser.error("--t-min and --t-max go together")
        try:
            ts += t_range(args.t_min, args.t_max, args.t_step)
        except ValueError as exc:
            parser.error(str(exc))
    if not ts:
        parser.error("give --t values or a --t-min/--t-max range")
    ts = sorted(set(ts))
    try:
        rows = make_table(ts, args.tau_step, args.b_step, args.tau1_rule)
    except ValueError as exc:
        parser.error(str(exc))
    text = _table_text(rows, args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    infeasible = [r.t for r in rows if not r.feasible]
    if infeasible:
        print(f"warning: no admissible (tau, b) for t in {infeasible}", file=sys.stderr)
        if args.strict:
            return 1
    return 0


def _distribution(args, parser) -> DiscreteDistribution:
    try:
        if args.atoms:
            return DiscreteDistribution.from_atoms(parse_atoms(args.atoms), name=args.atoms)
        if args.dist == "rademacher":
            return DiscreteDistribution.rademacher()
        return DiscreteDistribution.two_point_with_rho(args.rho)
    except ValueError as exc:
        parser.error(f"invalid distribution: {exc}")


def cmd_verify(args, parser) -> int:
    _check_steps(parser, args)
    dist = _distribution(args, parser)
    if args.n < 1:
        parser.error("--n must be >= 1")
    t_max = args.t_min if args.t_max is None else args.t_max
    try:
        grid = t_range(args.t_min, t_max, args.t_step)
        report = verify_bound(
            dist, args.n, grid,
            bound_function(args.tau_step, args.b_step, args.tau1_rule),
            x_max_factor=args.x_max_factor, tail=args.tail,
        )
    except NoFeasibleCandidate as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        parser.error(str(exc))
    _dump({
        "command": "verify",
        "inputs": {"dist": dist.name, "atoms": dist.atoms, "rho": dist.rho, "n": args.n,
                   "t_min": args.t_min, "t_max": t_max, "t_step": args.t_step},
        "results": report.as_dict(),
    })
    return 0 if report.ok else 1


def cmd_ci(args, parser) -> int:
    _check_steps(parser, args)
    try:
        res = ci_terms(args.n, args.eps, args.rho,
                       bound_function(args.tau_step, args.b_step, args.tau1_rule))
    except NoFeasibleCandidate as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        parser.error(str(exc))
    _dump({
        "command": "ci",
        "inputs": {"n": args.n, "eps": args.eps, "rho": args.rho},
        "results": res.as_dict(),
    })
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nonuniform-be",
        description="Nonuniform Berry-Esseen bound C(t): evaluation, optimisation, tables, checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate C(t) for given (t, tau, b)")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--explain", action="store_true",
                   help="also dump center quantities and every condition margin")
    p.add_argument("--tau1-rule", choices=TAU1_RULES, default="sequential")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("table", help="optimise C(t) over a list or range of t")
    p.add_argument("--t", type=float, action="append")
    p.add_argument("--t-min", type=float)
    p.add_argument("--t-max", type=float)
    p.add_argument("--t-step", type=float, default=1.0)
    p.add_argument("--format", choices=("csv", "tsv", "json"), default="csv")
    p.add_argument("--out")
    p.add_argument("--strict", action="store_true", help="exit 1 if any t is infeasible")
    _add_grid_flags(p)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("verify", help="check C(t) against an exact convolution")
    p.add_argument("--dist", choices=("rademacher", "two-point"), default="rademacher")
    p.add_argument("--rho", type=float, default=1.5, help="third absolute moment for two-point")
    p.add_argument("--atoms", help='explicit law, e.g. "(-1,0.5),(1,0.5)"')
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--t-min", type=float, default=3.3)
    p.add_argument("--t-max", type=float)
    p.add_argument("--t-step", type=float, default=0.1)
    p.add_argument("--x-max-factor", type=float, default=2.0)
    p.add_argument("--tail", choices=("upper", "lower"), default="upper")
    _add_grid_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("ci", help="bound on P(|sample mean - theta| > eps)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--rho", type=float, default=1.0)
    _add_grid_flags(p)
    p.set_defaults(func=cmd_ci)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    return args.func(args, sub)


if __name__ == "__main__":
    sys.exit(main())
