"""Command-line interface.

Units: prices, unit costs and price bands in USD per two-dose regimen;
quantities in millions of regimens; profits in millions of USD.

Exit codes: 0 success, 1 invalid input, 2 infeasible single-scenario solve.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .demand import compute_slopes, estimate_intercepts, load_historical
from .equilibrium import check_surplus_regime, private_equilibrium
from .market import (BASE_K, BASE_R_PUB, DataError, DemandCurve, DomainError,
                     default_sweep_grid, load_grid, load_scenario)
from .negotiation import ReducedProblem, oracle_solve, solve
from .sweep import (filter_by_band, format_band_table, price_cost_csv, price_demand_csv,
                    read_sweep_csv, run_sweep, summarize, write_sweep_csv)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INFEASIBLE = 2

DEFAULT_BAND_PF = (34.0, 44.0)
DEFAULT_BAND_MOD = (45.0, 55.0)


def _pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}") from None


def _band(text: str) -> tuple[float, float]:
    parts = text.split(":")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except (ValueError, IndexError):
        raise argparse.ArgumentTypeError(f"expected LOW:HIGH, got {text!r}") from None
    if len(parts) != 2 or not lo < hi:
        raise argparse.ArgumentTypeError(f"expected LOW:HIGH with LOW < HIGH, got {text!r}")
    return lo, hi


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def cmd_estimate(args) -> int:
    records = load_historical(args.data)
    b, c = compute_slopes(args.gamma, args.k)
    a_pub, a_priv = estimate_intercepts(records, args.gamma, args.r_pub, args.d)
    _emit(DemandCurve(a_pub=a_pub, a_priv=a_priv, b=b, c=c).to_dict())
    return EXIT_OK


def cmd_equilibrium(args) -> int:
    scenario = load_scenario(args.config)
    problem = ReducedProblem.from_scenario(scenario, load_historical(args.data))
    eq = private_equilibrium(problem.curve, scenario.gamma)
    out = eq.to_dict()
    headroom = check_surplus_regime(eq, scenario.params)
    out["surplus_headroom_millions"] = list(headroom.headroom)
    out["surplus_admissible"] = list(headroom.admissible)
    _emit(out)
    return EXIT_OK


def cmd_solve(args) -> int:
    scenario = load_scenario(args.config)
    problem = ReducedProblem.from_scenario(scenario, load_historical(args.data))
    sol = solve(problem)
    out = sol.to_dict()
    if args.oracle_n is not None:
        if args.oracle_n < 2:
            raise DomainError("--oracle-n must be at least 2")
        o = oracle_solve(problem, args.oracle_n)
        out["oracle"] = {
            "feasible": o.feasible,
            "p_pub": list(o.p_pub),
            "objective": o.objective,
            "max_violation": o.max_violation,
        }
    _emit(out)
    return EXIT_OK if sol.feasible else EXIT_INFEASIBLE


def cmd_sweep(args) -> int:
    grid = default_sweep_grid() if args.default_grid else load_grid(args.grid)
    records = load_historical(args.data)
    rows = run_sweep(grid, records, jobs=args.jobs)
    out = Path(args.out)
    write_sweep_csv(rows, out)
    summary = summarize(rows, args.band_pf, args.band_mod).to_dict()
    summary_path = Path(args.summary) if args.summary else out.with_suffix(".summary.json")
    summary_path.write_text(json.dumps(summary, indent=2) + "\n")
    if args.export_dir:
        export = Path(args.export_dir)
        export.mkdir(parents=True, exist_ok=True)
        (export / "prices_by_demand.csv").write_text(price_demand_csv(rows))
        (export / "prices_by_cost.csv").write_text(price_cost_csv(rows))
    _emit(summary)
    return EXIT_OK


def cmd_report(args) -> int:
    rows = read_sweep_csv(args.input)
    hits = filter_by_band(rows, args.band_pf, args.band_mod)
    if hits:
        sys.stdout.write(format_band_table(hits))
    else:
        sys.stdout.write("no scenarios fall inside the requested price bands\n")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage errors are validation errors (exit 1); exit 2 is reserved for infeasible solves
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="vaxprice",
        description="Duopoly vaccine pricing. Prices/costs in USD per two-dose regimen, "
                    "quantities in millions of regimens, profits in millions of USD.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def data_flag(p):
        p.add_argument("--data", default=None,
                       help="historical price CSV (per-dose USD, demand in millions of doses); "
                            "defaults to the bundled flu table")

    p = sub.add_parser("estimate", help="estimate demand-curve coefficients")
    data_flag(p)
    p.add_argument("--gamma", type=float, required=True, help="product similarity in (0,1)")
    p.add_argument("--k", type=int, default=BASE_K, help="price/quantity magnitude exponent (default 6)")
    p.add_argument("--d", "--unit-cost-usd", dest="d", type=_pair, default=(0.0, 0.0),
                   help="two-dose unit costs in USD for both manufacturers, e.g. 31.96,31.96")
    p.add_argument("--r-pub", type=float, default=BASE_R_PUB, help="public share of total demand")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("equilibrium", help="private-sector equilibrium for a scenario config")
    data_flag(p)
    p.add_argument("--config", required=True, help="scenario JSON file")
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("solve", help="solve one scenario's public-sector negotiation")
    data_flag(p)
    p.add_argument("--config", required=True, help="scenario JSON file")
    p.add_argument("--oracle-n", type=int, default=None,
                   help="also run the N-by-N brute-force grid oracle")
    p.set_defaults(func=cmd_solve)

    def band_flags(p):
        p.add_argument("--band-pf", "--band-pf-usd", dest="band_pf", type=_band,
                       default=DEFAULT_BAND_PF, help="manufacturer 1 public price band LOW:HIGH in USD")
        p.add_argument("--band-mod", "--band-mod-usd", dest="band_mod", type=_band,
                       default=DEFAULT_BAND_MOD, help="manufacturer 2 public price band LOW:HIGH in USD")

    p = sub.add_parser("sweep", help="solve a grid of scenarios and write CSV + summary JSON")
    data_flag(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--default-grid", action="store_true", help="the 1,296-scenario default grid")
    src.add_argument("--grid", help="JSON array of scenario configs")
    p.add_argument("--out", required=True, help="results CSV path")
    p.add_argument("--summary", default=None, help="summary JSON path (default: <out>.summary.json)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--export-dir", default=None,
                   help="also write price-vs-demand and price-vs-cost CSVs here")
    band_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="tabulate sweep scenarios inside public price bands")
    p.add_argument("--in", dest="input", required=True, help="results CSV from `sweep`")
    band_flags(p)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help or a usage error
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (DataError, DomainError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
