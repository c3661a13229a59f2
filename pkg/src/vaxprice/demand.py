"""Demand-curve estimation from historical two-manufacturer vaccine prices."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

from .market import DataError, DemandCurve, DomainError, ScenarioConfig

CSV_COLUMNS = (
    "year",
    "pub_price_m1",
    "pub_price_m2",
    "priv_price_m1",
    "priv_price_m2",
    "total_demand_millions",
)


@dataclass(frozen=True)
class HistoricalRecord:
    """One contract year: per-dose prices by sector and manufacturer, total doses (millions)."""

    year_label: str
    pub_price: tuple[float, float]
    priv_price: tuple[float, float]
    total_demand: float


def bundled_data_path() -> Path:
    """Location of the bundled 2010-11 .. 2019-20 flu vaccine table."""
    return Path(str(resources.files("vaxprice") / "data" / "flu_prices.csv"))


def load_historical(path: str | Path | None = None) -> list[HistoricalRecord]:
    """Parse a historical price CSV. ``None`` loads the bundled flu dataset.

    Raises DataError naming the 1-based data row and column of the first bad field.
    """
    path = bundled_data_path() if path is None else Path(path)
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read historical data {path}: {exc.strerror}") from None

    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        raise DataError(f"{path}: no data rows")
    header = tuple(cell.strip() for cell in rows[0])
    if header != CSV_COLUMNS:
        raise DataError(f"{path}: header must be {','.join(CSV_COLUMNS)}, got {','.join(header)}")
    if len(rows) == 1:
        raise DataError(f"{path}: no data rows")

    records = []
    for rownum, row in enumerate(rows[1:], start=1):
        if len(row) != len(CSV_COLUMNS):
            raise DataError(
                f"{path}: row {rownum} has {len(row)} columns, expected {len(CSV_COLUMNS)}"
            )
        values = []
        for col, cell in zip(CSV_COLUMNS[1:], row[1:]):
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"{path}: row {rownum}, column {col}: {cell!r} is not numeric") from None
            if not math.isfinite(v) or v <= 0:
                raise DataError(f"{path}: row {rownum}, column {col}: value must be positive, got {cell!r}")
            values.append(v)
        records.append(HistoricalRecord(
            year_label=row[0].strip(),
            pub_price=(values[0], values[1]),
            priv_price=(values[2], values[3]),
            total_demand=values[4],
        ))
    return records


def compute_slopes(gamma: float, k: int = 6) -> tuple[float, float]:
    """Own-price slope b and cross-price slope c in millions of people per USD.

    b = 10**k / ((1+gamma)(1-gamma)) people per USD, divided by 1e6 for the
    millions convention; c = gamma * b.
    """
    if not (isinstance(gamma, (int, float)) and 0 < gamma < 1):
        raise DomainError(f"gamma must lie in (0,1), got {gamma}")
    if int(k) != k or k < 0:
        raise DomainError(f"k must be a non-negative integer, got {k}")
    b = 10.0 ** (int(k) - 6) / ((1.0 + gamma) * (1.0 - gamma))
    return b, gamma * b


def estimate_intercepts(
    records: Sequence[HistoricalRecord],
    gamma: float,
    r_pub: float,
    d: Sequence[float],
) -> tuple[float, float]:
    """Zero-price two-dose demand intercepts ``(a_pub, a_priv)`` in millions of people.

    For a sector with share r of total demand, each year contributes
    ``r*D_y/2 + sum_i(2*p_iy + d_i) / (2 + 2*gamma)``; the intercept is the mean
    over years. Per-dose flu prices are doubled to price a two-dose regimen and
    the sector's flu quantity is taken as its share of the year's total doses.
    """
    if not records:
        raise DataError("no historical records to estimate from")
    if not 0 < gamma < 1:
        raise DomainError(f"gamma must lie in (0,1), got {gamma}")
    if not 0 < r_pub < 1:
        raise DomainError(f"r_pub must lie in (0,1), got {r_pub}")
    if len(d) != 2 or any(x < 0 for x in d):
        raise DomainError(f"unit costs must be two non-negative values, got {d}")

    r_priv = 1.0 - r_pub
    scale = 1.0 / (2.0 + 2.0 * gamma)
    cost = d[0] + d[1]
    pub_total = 0.0
    priv_total = 0.0
    for rec in records:
        pub_total += 0.5 * r_pub * rec.total_demand + scale * (2 * sum(rec.pub_price) + cost)
        priv_total += 0.5 * r_priv * rec.total_demand + scale * (2 * sum(rec.priv_price) + cost)
    n = len(records)
    return pub_total / n, priv_total / n


def estimate_curve(records: Sequence[HistoricalRecord], scenario: ScenarioConfig) -> DemandCurve:
    """Slopes and intercepts for one scenario (intercepts depend on gamma and costs)."""
    b, c = compute_slopes(scenario.gamma, scenario.k)
    a_pub, a_priv = estimate_intercepts(records, scenario.gamma, scenario.r_pub, scenario.unit_costs)
    return DemandCurve(a_pub=a_pub, a_priv=a_priv, b=b, c=c)
