"""Parameter sweeps over scenario grids, aggregate statistics and exports."""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .demand import HistoricalRecord
from .market import DataError, ScenarioConfig, Status, SweepSummary
from .negotiation import DEFAULT_TOLERANCES, Tolerances, solve_scenario

SWEEP_COLUMNS = (
    "scenario_id", "D", "gamma", "P_pf", "P_mod", "d_pf", "d_mod", "status",
    "p_pub_pf", "p_pub_mod", "q_pub_pf", "q_pub_mod", "p_priv", "q_priv",
    "profit_pf", "profit_mod", "objective",
)

Band = tuple[float, float]


@dataclass(frozen=True)
class SweepResultRow:
    scenario_id: int
    D: float
    gamma: float
    P_pf: float
    P_mod: float
    d_pf: float
    d_mod: float
    status: str
    p_pub: Optional[tuple[float, float]] = None
    q_pub: Optional[tuple[float, float]] = None
    p_priv: Optional[float] = None
    q_priv: Optional[float] = None
    realized_profit: Optional[tuple[float, float]] = None
    objective: Optional[float] = None
    error: Optional[str] = None

    @property
    def interior(self) -> bool:
        return self.status == Status.INTERIOR.value

    @property
    def feasible(self) -> bool:
        return self.status in (Status.INTERIOR.value, Status.BOUNDARY.value)

    def as_csv_record(self) -> list[str]:
        def fmt(v):
            return "" if v is None else repr(float(v))

        pair = lambda t, i: None if t is None else t[i]  # noqa: E731
        return [
            str(self.scenario_id), fmt(self.D), fmt(self.gamma), fmt(self.P_pf),
            fmt(self.P_mod), fmt(self.d_pf), fmt(self.d_mod), self.status,
            fmt(pair(self.p_pub, 0)), fmt(pair(self.p_pub, 1)),
            fmt(pair(self.q_pub, 0)), fmt(pair(self.q_pub, 1)),
            fmt(self.p_priv), fmt(self.q_priv),
            fmt(pair(self.realized_profit, 0)), fmt(pair(self.realized_profit, 1)),
            fmt(self.objective),
        ]


def _params(scenario: ScenarioConfig) -> dict:
    m1, m2 = scenario.params
    return dict(scenario_id=scenario.scenario_id, D=scenario.total_demand, gamma=scenario.gamma,
                P_pf=m1.target_profit, P_mod=m2.target_profit,
                d_pf=m1.unit_cost, d_mod=m2.unit_cost)


def run_scenario(scenario: ScenarioConfig, historical: Sequence[HistoricalRecord],
                 tolerances: Tolerances = DEFAULT_TOLERANCES) -> SweepResultRow:
    """Solve one scenario; any exception becomes an ERROR row."""
    try:
        problem, sol = solve_scenario(scenario, historical, tolerances)
    except Exception as exc:  # one bad scenario must not abort a sweep
        return SweepResultRow(**_params(scenario), status=Status.ERROR.value,
                              error=f"{type(exc).__name__}: {exc}")
    eq = problem.equilibrium
    if not sol.feasible:
        return SweepResultRow(**_params(scenario), status=sol.status.value,
                              p_priv=eq.p_priv, q_priv=eq.q_priv)
    return SweepResultRow(
        **_params(scenario), status=sol.status.value,
        p_pub=sol.p_pub, q_pub=sol.q_pub, p_priv=eq.p_priv, q_priv=eq.q_priv,
        realized_profit=sol.realized_profit, objective=sol.objective,
    )


def run_sweep(grid: Sequence[ScenarioConfig], historical: Sequence[HistoricalRecord],
              jobs: int = 1, tolerances: Tolerances = DEFAULT_TOLERANCES) -> list[SweepResultRow]:
    """Solve every scenario; rows come back sorted by scenario_id for any ``jobs``."""
    if not grid:
        raise ValueError("scenario grid is empty")
    if not historical:
        raise ValueError("historical data is empty")
    work = partial(run_scenario, historical=tuple(historical), tolerances=tolerances)
    if jobs <= 1:
        rows = [work(s) for s in grid]
    else:
        chunksize = max(1, len(grid) // (8 * jobs))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(work, grid, chunksize=chunksize))
    return sorted(rows, key=lambda r: r.scenario_id)


def summarize(rows: Sequence[SweepResultRow], band_1: Optional[Band] = None,
              band_2: Optional[Band] = None) -> SweepSummary:
    """Status counts and the mean public price pair over INTERIOR rows."""
    if not rows:
        raise ValueError("no sweep rows to summarize")
    counts = defaultdict(int)
    for r in rows:
        counts[r.status] += 1
    interior = [r for r in rows if r.interior]
    centroid = None
    if interior:
        centroid = (math.fsum(r.p_pub[0] for r in interior) / len(interior),
                    math.fsum(r.p_pub[1] for r in interior) / len(interior))
    matches = []
    if band_1 is not None and band_2 is not None:
        matches = [r.scenario_id for r in filter_by_band(rows, band_1, band_2)]
    return SweepSummary(
        n_total=len(rows),
        n_infeasible=counts[Status.INFEASIBLE.value],
        n_boundary=counts[Status.BOUNDARY.value],
        n_interior=counts[Status.INTERIOR.value],
        n_error=counts[Status.ERROR.value],
        centroid=centroid,
        band_matches=matches,
    )


def filter_by_band(rows: Iterable[SweepResultRow], band_1: Band, band_2: Band) -> list[SweepResultRow]:
    """INTERIOR rows whose public prices fall inside both closed bands."""
    for band in (band_1, band_2):
        if not band[0] < band[1]:
            raise ValueError(f"price band must have lower < upper, got {band}")
    hits = [
        r for r in rows
        if r.interior
        and band_1[0] <= r.p_pub[0] <= band_1[1]
        and band_2[0] <= r.p_pub[1] <= band_2[1]
    ]
    return sorted(hits, key=lambda r: r.scenario_id)


def mean_price_by_cost(rows: Iterable[SweepResultRow]) -> dict[int, dict[float, float]]:
    """Per manufacturer (0, 1): mean public price over INTERIOR rows at each own unit cost."""
    acc: dict[int, dict[float, list[float]]] = {0: defaultdict(list), 1: defaultdict(list)}
    for r in rows:
        if r.interior:
            acc[0][r.d_pf].append(r.p_pub[0])
            acc[1][r.d_mod].append(r.p_pub[1])
    return {m: {d: math.fsum(v) / len(v) for d, v in sorted(by.items())} for m, by in acc.items()}


def mean_price_by_demand(rows: Iterable[SweepResultRow]) -> dict[float, float]:
    """Mean of the average public price pair over INTERIOR rows, per total demand."""
    acc: dict[float, list[float]] = defaultdict(list)
    for r in rows:
        if r.interior:
            acc[r.D].append(0.5 * (r.p_pub[0] + r.p_pub[1]))
    return {D: math.fsum(v) / len(v) for D, v in sorted(acc.items())}


# ---------------------------------------------------------------------------
# CSV input / output

def rows_to_csv(rows: Sequence[SweepResultRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow(r.as_csv_record())
    return buf.getvalue()


def write_sweep_csv(rows: Sequence[SweepResultRow], path: str | Path) -> None:
    Path(path).write_text(rows_to_csv(rows))


def read_sweep_csv(path: str | Path) -> list[SweepResultRow]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read sweep results {path}: {exc.strerror}") from None
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or tuple(reader.fieldnames) != SWEEP_COLUMNS:
        raise DataError(f"{path}: not a sweep results file (unexpected header)")
    rows = []
    for n, rec in enumerate(reader, start=1):
        try:
            opt = lambda key: float(rec[key]) if rec[key] != "" else None  # noqa: E731

            def pair(k1, k2):
                a, b = opt(k1), opt(k2)
                return None if a is None or b is None else (a, b)

            rows.append(SweepResultRow(
                scenario_id=int(rec["scenario_id"]), D=float(rec["D"]), gamma=float(rec["gamma"]),
                P_pf=float(rec["P_pf"]), P_mod=float(rec["P_mod"]),
                d_pf=float(rec["d_pf"]), d_mod=float(rec["d_mod"]), status=rec["status"],
                p_pub=pair("p_pub_pf", "p_pub_mod"), q_pub=pair("q_pub_pf", "q_pub_mod"),
                p_priv=opt("p_priv"), q_priv=opt("q_priv"),
                realized_profit=pair("profit_pf", "profit_mod"), objective=opt("objective"),
            ))
        except (TypeError, ValueError) as exc:
            raise DataError(f"{path}: row {n} is malformed: {exc}") from None
    if not rows:
        raise DataError(f"{path}: no data rows")
    return rows


def price_demand_csv(rows: Iterable[SweepResultRow]) -> str:
    """INTERIOR (p_pub_pf, p_pub_mod, D) triples: scatter data for prices vs. demand."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("scenario_id", "p_pub_pf", "p_pub_mod", "D"))
    for r in rows:
        if r.interior:
            w.writerow((r.scenario_id, repr(r.p_pub[0]), repr(r.p_pub[1]), repr(r.D)))
    return buf.getvalue()


def price_cost_csv(rows: Iterable[SweepResultRow], labels: Sequence[str] = ("Pfizer", "Moderna")) -> str:
    """Long-format (manufacturer, unit_cost, p_pub) for price distributions by own cost."""
    rows = [r for r in rows if r.interior]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("manufacturer", "unit_cost", "scenario_id", "p_pub"))
    for m, label in enumerate(labels):
        key = (lambda r: r.d_pf) if m == 0 else (lambda r: r.d_mod)
        for r in sorted(rows, key=lambda r: (key(r), r.scenario_id)):
            w.writerow((label, repr(key(r)), r.scenario_id, repr(r.p_pub[m])))
    return buf.getvalue()


def format_band_table(rows: Sequence[SweepResultRow], labels: Sequence[str] = ("Pfizer", "Moderna")) -> str:
    """One column per scenario, row labels as in a printed scenario comparison table.

    Realized profits strictly above target (by more than $0.05M) are marked with '*'.
    """
    pf, mod = labels
    spec = [
        ("Scenario id", lambda r: str(r.scenario_id)),
        ("Total Demand, D (M)", lambda r: f"{r.D:g}"),
        ("Product Similarity, gamma", lambda r: f"{r.gamma:.2f}"),
        (f"{pf} Target Profit ($M)", lambda r: f"{r.P_pf:g}"),
        (f"{pf} Production Cost ($)", lambda r: f"{r.d_pf:.2f}"),
        (f"{mod} Target Profit ($M)", lambda r: f"{r.P_mod:g}"),
        (f"{mod} Production Cost ($)", lambda r: f"{r.d_mod:.2f}"),
        ("Private Sector Equilibrium Price ($)", lambda r: f"{r.p_priv:.2f}"),
        ("Private Sector Equilibrium Quantity (M)", lambda r: f"{r.q_priv:.1f}"),
        (f"{pf} Public Sector Price ($)", lambda r: f"{r.p_pub[0]:.2f}"),
        (f"{pf} Public Sector Quantity (M)", lambda r: f"{r.q_pub[0]:.1f}"),
        (f"{pf} Profit Realized ($M)", lambda r: _profit_cell(r.realized_profit[0], r.P_pf)),
        (f"{mod} Public Sector Price ($)", lambda r: f"{r.p_pub[1]:.2f}"),
        (f"{mod} Public Sector Quantity (M)", lambda r: f"{r.q_pub[1]:.1f}"),
        (f"{mod} Profit Realized ($M)", lambda r: _profit_cell(r.realized_profit[1], r.P_mod)),
    ]
    header = ["Scenario"] + [str(i) for i in range(1, len(rows) + 1)]
    table = [header] + [[label] + [f(r) for r in rows] for label, f in spec]
    widths = [max(len(line[i]) for line in table) for i in range(len(header))]
    out = []
    for n, line in enumerate(table):
        out.append("  ".join(cell.ljust(widths[0]) if i == 0 else cell.rjust(widths[i])
                             for i, cell in enumerate(line)).rstrip())
        if n == 0:
            out.append("-" * len(out[0]))
    return "\n".join(out) + "\n"


def _profit_cell(realized: float, target: float) -> str:
    return f"{realized:.1f}" + ("*" if realized > target + 0.05 else "")
