"""Domain types and scenario grids for the two-manufacturer vaccine market.

Units used throughout the package:

* quantities in millions of two-dose regimens (equivalently, millions of people),
* prices and unit costs in USD per regimen,
* profits and expenditures in millions of USD.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Optional


class DomainError(ValueError):
    """A parameter lies outside the region where the model is defined."""


class DataError(ValueError):
    """Input data or a configuration file could not be parsed."""


class Status(str, Enum):
    INTERIOR = "INTERIOR"
    BOUNDARY = "BOUNDARY"
    INFEASIBLE = "INFEASIBLE"
    ERROR = "ERROR"


# A solved scenario is INTERIOR when both public prices and quantities exceed this.
INTERIOR_THRESHOLD = 1e-3

# Base values used by the default sweep.
BASE_R_PUB = 0.57
BASE_MU = 0.9
BASE_K = 6
BASE_CAPACITY = (250.0, 200.0)
DEFAULT_LABELS = ("Pfizer", "Moderna")

GRID_DEMAND = (157.05, 174.5, 191.95)
GRID_GAMMA = (0.25, 0.50, 0.75)
GRID_PROFIT_PF = (25.7, 234.0, 2570.0)
GRID_PROFIT_MOD = (41.4, 496.0, 2570.0)
GRID_COST = (0.0, 6.60, 23.44, 31.96)


@dataclass(frozen=True)
class Manufacturer:
    index: int
    label: str

    def __post_init__(self):
        if self.index not in (1, 2):
            raise DomainError(f"manufacturer index must be 1 or 2, got {self.index}")


@dataclass(frozen=True)
class ManufacturerParams:
    capacity: float
    target_profit: float
    unit_cost: float

    def __post_init__(self):
        _require_finite(capacity=self.capacity, target_profit=self.target_profit,
                        unit_cost=self.unit_cost)
        if self.capacity <= 0:
            raise DomainError(f"capacity must be positive, got {self.capacity}")
        if self.target_profit < 0:
            raise DomainError(f"target_profit must be non-negative, got {self.target_profit}")
        if self.unit_cost < 0:
            raise DomainError(f"unit_cost must be non-negative, got {self.unit_cost}")


@dataclass(frozen=True)
class ScenarioConfig:
    """One complete parameterization of the negotiation model."""

    total_demand: float
    gamma: float
    params: tuple[ManufacturerParams, ManufacturerParams]
    k: int = BASE_K
    r_pub: float = BASE_R_PUB
    mu: float = BASE_MU
    scenario_id: int = 0
    labels: tuple[str, str] = DEFAULT_LABELS

    def __post_init__(self):
        _require_finite(total_demand=self.total_demand, gamma=self.gamma,
                        r_pub=self.r_pub, mu=self.mu)
        if len(self.params) != 2 or len(self.labels) != 2:
            raise DomainError("a scenario has exactly two manufacturers")
        object.__setattr__(self, "params", tuple(self.params))
        object.__setattr__(self, "labels", tuple(self.labels))
        if self.total_demand <= 0:
            raise DomainError(f"total_demand must be positive, got {self.total_demand}")
        if not 0 < self.gamma < 1:
            raise DomainError(f"gamma must lie in (0,1), got {self.gamma}")
        if not 0 < self.r_pub < 1:
            raise DomainError(f"r_pub must lie in (0,1), got {self.r_pub}")
        if not 0 <= self.mu <= 1:
            raise DomainError(f"mu must lie in [0,1], got {self.mu}")
        if int(self.k) != self.k:
            raise DomainError(f"k must be an integer, got {self.k}")

    @property
    def r_priv(self) -> float:
        return 1.0 - self.r_pub

    @property
    def manufacturers(self) -> tuple[Manufacturer, Manufacturer]:
        return Manufacturer(1, self.labels[0]), Manufacturer(2, self.labels[1])

    @property
    def unit_costs(self) -> tuple[float, float]:
        return self.params[0].unit_cost, self.params[1].unit_cost

    def swapped(self) -> "ScenarioConfig":
        """The same scenario with the two manufacturers relabeled."""
        return ScenarioConfig(
            total_demand=self.total_demand, gamma=self.gamma,
            params=(self.params[1], self.params[0]), k=self.k, r_pub=self.r_pub,
            mu=self.mu, scenario_id=self.scenario_id,
            labels=(self.labels[1], self.labels[0]),
        )

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "total_demand_millions": self.total_demand,
            "gamma": self.gamma,
            "k": self.k,
            "r_pub": self.r_pub,
            "mu": self.mu,
            "manufacturers": [
                {
                    "label": label,
                    "capacity_millions": p.capacity,
                    "target_profit_millions": p.target_profit,
                    "unit_cost_usd": p.unit_cost,
                }
                for label, p in zip(self.labels, self.params)
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any], scenario_id: int = 0) -> "ScenarioConfig":
        try:
            mans = data["manufacturers"]
            if not isinstance(mans, list) or len(mans) != 2:
                raise DataError("'manufacturers' must be an array of exactly two objects")
            params = tuple(
                ManufacturerParams(
                    capacity=float(m["capacity_millions"]),
                    target_profit=float(m["target_profit_millions"]),
                    unit_cost=float(m["unit_cost_usd"]),
                )
                for m in mans
            )
            labels = tuple(str(m.get("label", DEFAULT_LABELS[i])) for i, m in enumerate(mans))
            k = data.get("k", BASE_K)
            if isinstance(k, float) and k.is_integer():
                k = int(k)
            return cls(
                total_demand=float(data["total_demand_millions"]),
                gamma=float(data["gamma"]),
                params=params,
                k=k,
                r_pub=float(data.get("r_pub", BASE_R_PUB)),
                mu=float(data.get("mu", BASE_MU)),
                scenario_id=int(data.get("scenario_id", scenario_id)),
                labels=labels,
            )
        except KeyError as exc:
            raise DataError(f"scenario config is missing key {exc}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, (DataError, DomainError)):
                raise
            raise DataError(f"scenario config has a malformed value: {exc}") from None


@dataclass(frozen=True)
class DemandCurve:
    """Linear demand coefficients shared by both sectors' slopes.

    ``q_i = a - b*p_i + c*p_j`` with ``a`` taken from the relevant sector.
    """

    a_pub: float
    a_priv: float
    b: float
    c: float

    def __post_init__(self):
        _require_finite(a_pub=self.a_pub, a_priv=self.a_priv, b=self.b, c=self.c)
        if self.a_pub <= 0 or self.a_priv <= 0:
            raise DomainError("demand intercepts must be positive")
        if not self.b > self.c > 0:
            raise DomainError(f"slopes must satisfy b > c > 0, got b={self.b}, c={self.c}")

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class PrivateEquilibrium:
    """Symmetric private-sector price and per-manufacturer quantity, plus the bound U."""

    p_priv: float
    q_priv: float
    surplus_bound: float

    def to_dict(self) -> dict[str, float]:
        return {
            "p_priv": self.p_priv,
            "q_priv_millions": self.q_priv,
            "surplus_bound_millions": self.surplus_bound,
        }


@dataclass(frozen=True)
class OptimalityCertificate:
    grid_resolution: float
    incumbent_objective: Optional[float]
    lower_bound_gap: Optional[float]
    refinement_rounds: int


@dataclass(frozen=True)
class NegotiationSolution:
    status: Status
    p_pub: tuple[float, float]
    q_pub: tuple[float, float]
    z: float
    objective: float
    realized_profit: tuple[float, float]
    max_violation: float
    certificate_gap: Optional[float]
    certificate: Optional[OptimalityCertificate] = None

    @property
    def feasible(self) -> bool:
        return self.status in (Status.INTERIOR, Status.BOUNDARY)

    def to_dict(self) -> dict[str, Any]:
        out = {
            "status": self.status.value,
            "p_pub": list(self.p_pub),
            "q_pub": list(self.q_pub),
            "z": self.z,
            "objective": self.objective,
            "realized_profit": list(self.realized_profit),
            "max_violation": self.max_violation,
            "certificate_gap": self.certificate_gap,
        }
        if self.certificate is not None:
            out["certificate"] = asdict(self.certificate)
        return out


@dataclass(frozen=True)
class SweepSummary:
    n_total: int
    n_infeasible: int
    n_boundary: int
    n_interior: int
    n_error: int
    centroid: Optional[tuple[float, float]]
    band_matches: list[int]

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["centroid"] = list(self.centroid) if self.centroid is not None else None
        return d


def load_scenario(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise DataError(f"cannot read scenario config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise DataError(f"{path}: scenario config must be a JSON object")
    return ScenarioConfig.from_json_dict(data)


def load_grid(path: str | Path) -> list[ScenarioConfig]:
    """Read a JSON array of scenario objects; ids default to 1-based file order."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise DataError(f"cannot read grid file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path} is not valid JSON: {exc}") from None
    if isinstance(data, dict) and "scenarios" in data:
        data = data["scenarios"]
    if not isinstance(data, list) or not data:
        raise DataError(f"{path}: grid must be a non-empty JSON array of scenario objects")
    configs = []
    for i, item in enumerate(data, start=1):
        if not isinstance(item, dict):
            raise DataError(f"{path}: grid entry {i} is not an object")
        configs.append(ScenarioConfig.from_json_dict(item, scenario_id=i))
    return configs


def default_sweep_grid() -> list[ScenarioConfig]:
    """The 1,296-scenario sensitivity grid, ids 1..1296 in lexicographic factor order.

    Factor order: demand, similarity, Pfizer target profit, Moderna target profit,
    Pfizer unit cost, Moderna unit cost (last factor varies fastest).
    """
    grid = []
    factors = itertools.product(GRID_DEMAND, GRID_GAMMA, GRID_PROFIT_PF, GRID_PROFIT_MOD,
                                GRID_COST, GRID_COST)
    for sid, (demand, gamma, p_pf, p_mod, d_pf, d_mod) in enumerate(factors, start=1):
        grid.append(ScenarioConfig(
            total_demand=demand,
            gamma=gamma,
            params=(
                ManufacturerParams(BASE_CAPACITY[0], p_pf, d_pf),
                ManufacturerParams(BASE_CAPACITY[1], p_mod, d_mod),
            ),
            scenario_id=sid,
        ))
    return grid


def _require_finite(**values: float) -> None:
    for name, value in values.items():
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise DomainError(f"{name} must be a finite number, got {value!r}")
