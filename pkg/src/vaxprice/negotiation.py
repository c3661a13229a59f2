"""Public-sector price negotiation solved to certified global optimality.

The public quantities are affine in the public prices, so the program is
searched in the two-dimensional price plane. ``solve`` runs a spatial
branch-and-bound over price rectangles; ``oracle_solve`` is a plain uniform
grid scan used to cross-check it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .demand import HistoricalRecord, estimate_curve
from .equilibrium import private_equilibrium
from .market import (
    INTERIOR_THRESHOLD,
    DemandCurve,
    DomainError,
    NegotiationSolution,
    OptimalityCertificate,
    PrivateEquilibrium,
    ScenarioConfig,
    Status,
)

CONSTRAINT_NAMES = (
    "public_demand",
    "profit_1",
    "profit_2",
    "capacity_1",
    "capacity_2",
    "surplus_1",
    "surplus_2",
    "quantity_1",
    "quantity_2",
    "price_1",
    "price_2",
)

# Objectives closer than this are treated as tied (then smaller gap, then smaller p1).
_TIE_EPS = 1e-9


@dataclass(frozen=True)
class Tolerances:
    feasibility: float = 1e-6
    price_resolution: float = 1e-4
    objective_gap: float = 1e-3


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class ReducedProblem:
    """The negotiation program restricted to the public price pair."""

    curve: DemandCurve
    equilibrium: PrivateEquilibrium
    scenario: ScenarioConfig

    def __post_init__(self):
        values = (self.curve.a_pub, self.curve.a_priv, self.curve.b, self.curve.c,
                  self.equilibrium.p_priv, self.equilibrium.q_priv,
                  self.equilibrium.surplus_bound)
        if not all(math.isfinite(v) for v in values):
            raise DomainError("problem parameters must be finite")
        if self.curve.a_pub <= 0:
            raise DomainError(f"a_pub must be positive for a non-empty price box, got {self.curve.a_pub}")
        if self.curve.b <= self.curve.c:
            raise DomainError("own-price slope must exceed cross-price slope")

    @property
    def p_max(self) -> float:
        """Upper price bound: both public quantities non-negative implies p1 + p2 <= this."""
        return 2.0 * self.curve.a_pub / (self.curve.b - self.curve.c)

    @classmethod
    def from_scenario(cls, scenario: ScenarioConfig,
                      records: Sequence[HistoricalRecord]) -> "ReducedProblem":
        curve = estimate_curve(records, scenario)
        return cls(curve=curve, equilibrium=private_equilibrium(curve, scenario.gamma),
                   scenario=scenario)

    def swapped(self) -> "ReducedProblem":
        return ReducedProblem(self.curve, self.equilibrium, self.scenario.swapped())


@dataclass(frozen=True)
class PointEvaluation:
    q_pub: tuple[float, float]
    objective: float
    profit: tuple[float, float]
    max_violation: float


def evaluate_points(problem: ReducedProblem, p1, p2) -> dict[str, np.ndarray]:
    """Vectorized evaluation at price arrays ``p1``, ``p2`` (broadcast together).

    Returns quantities, objective, profits, the slack of every constraint
    (non-negative when satisfied, stacked along axis 0) and the max violation.
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    a, b, c = problem.curve.a_pub, problem.curve.b, problem.curve.c
    sc = problem.scenario
    mu = sc.mu
    pp, qp, U = problem.equilibrium.p_priv, problem.equilibrium.q_priv, problem.equilibrium.surplus_bound
    (K1, P1, d1), (K2, P2, d2) = ((m.capacity, m.target_profit, m.unit_cost) for m in sc.params)

    q1 = a - b * p1 + c * p2
    q2 = a - b * p2 + c * p1
    objective = mu * (q1 * p1 + q2 * p2) + (1.0 - mu) * np.abs(p1 - p2)
    profit1 = qp * (pp - d1) + q1 * (p1 - d1)
    profit2 = qp * (pp - d2) + q2 * (p2 - d2)
    slacks = np.stack(np.broadcast_arrays(
        q1 + q2 - sc.r_pub * sc.total_demand,
        profit1 - P1,
        profit2 - P2,
        K1 - (q1 + qp),
        K2 - (q2 + qp),
        K1 - q1 - U,
        K2 - q2 - U,
        q1,
        q2,
        p1,
        p2,
    ))
    max_violation = np.maximum(0.0, -slacks.min(axis=0))
    return {
        "q1": q1, "q2": q2, "objective": objective,
        "profit1": profit1, "profit2": profit2,
        "slacks": slacks, "max_violation": max_violation,
    }


def evaluate_point(problem: ReducedProblem, p: Sequence[float]) -> PointEvaluation:
    ev = evaluate_points(problem, float(p[0]), float(p[1]))
    return PointEvaluation(
        q_pub=(float(ev["q1"]), float(ev["q2"])),
        objective=float(ev["objective"]),
        profit=(float(ev["profit1"]), float(ev["profit2"])),
        max_violation=float(ev["max_violation"]),
    )


def _cell_bounds(problem: ReducedProblem, lo1, hi1, lo2, hi2):
    """Exact objective minimum bound and per-constraint slack maxima over rectangles.

    Slack rows follow the first nine entries of ``CONSTRAINT_NAMES``; price
    non-negativity holds throughout the box and is not bounded.

    The quadratic part of the objective is concave (b > c), so its minimum over a
    rectangle is at a corner; the gap term is bounded by the rectangle's distance
    to the diagonal. Linear slacks peak at a corner. A profit slack is concave in
    the own price and linear in the other, so it peaks at an endpoint of the other
    price with the own price at its clipped vertex.
    """
    a, b, c = problem.curve.a_pub, problem.curve.b, problem.curve.c
    sc = problem.scenario
    mu = sc.mu
    pp, qp, U = problem.equilibrium.p_priv, problem.equilibrium.q_priv, problem.equilibrium.surplus_bound
    (K1, P1, d1), (K2, P2, d2) = ((m.capacity, m.target_profit, m.unit_cost) for m in sc.params)

    def revenue(x1, x2):
        return a * (x1 + x2) - b * (x1 * x1 + x2 * x2) + 2.0 * c * x1 * x2

    corner_min = np.minimum(np.minimum(revenue(lo1, lo2), revenue(lo1, hi2)),
                            np.minimum(revenue(hi1, lo2), revenue(hi1, hi2)))
    gap_min = np.maximum(0.0, np.maximum(lo1 - hi2, lo2 - hi1))
    obj_lb = mu * corner_min + (1.0 - mu) * gap_min

    def profit_max(lo_own, hi_own, other, cost, target):
        v = np.clip((a + c * other + b * cost) / (2.0 * b), lo_own, hi_own)
        return qp * (pp - cost) + (a - b * v + c * other) * (v - cost) - target

    q1_min = a - b * hi1 + c * lo2
    q2_min = a - b * hi2 + c * lo1
    slack_ub = np.stack([
        2.0 * a - (b - c) * (lo1 + lo2) - sc.r_pub * sc.total_demand,
        np.maximum(profit_max(lo1, hi1, lo2, d1, P1), profit_max(lo1, hi1, hi2, d1, P1)),
        np.maximum(profit_max(lo2, hi2, lo1, d2, P2), profit_max(lo2, hi2, hi1, d2, P2)),
        K1 - qp - q1_min,
        K2 - qp - q2_min,
        K1 - U - q1_min,
        K2 - U - q2_min,
        a - b * lo1 + c * hi2,
        a - b * lo2 + c * hi1,
    ])
    return obj_lb, slack_ub


@dataclass(frozen=True)
class _Candidate:
    p1: float
    p2: float
    objective: float

    @property
    def z(self) -> float:
        return abs(self.p1 - self.p2)

    def beats(self, other: Optional["_Candidate"]) -> bool:
        if other is None:
            return True
        if self.objective < other.objective - _TIE_EPS:
            return True
        if self.objective > other.objective + _TIE_EPS:
            return False
        return (self.z, self.p1) < (other.z, other.p1)


def _candidate(problem: ReducedProblem, p1: float, p2: float,
               tau: float) -> tuple[Optional[_Candidate], float]:
    ev = evaluate_point(problem, (p1, p2))
    if ev.max_violation <= tau:
        return _Candidate(float(p1), float(p2), ev.objective), ev.max_violation
    return None, ev.max_violation


def _polish(problem: ReducedProblem, p1: float, p2: float,
            tau: float) -> tuple[Optional[_Candidate], float, tuple[float, float]]:
    """Local constrained descent in (p1, p2, z) from a starting price pair."""
    a, b, c = problem.curve.a_pub, problem.curve.b, problem.curve.c
    mu = problem.scenario.mu
    pmax = problem.p_max

    def fun(x):
        return mu * ((a - b * x[0] + c * x[1]) * x[0] + (a - b * x[1] + c * x[0]) * x[1]) + (1 - mu) * x[2]

    def jac(x):
        g1 = a - 2 * b * x[0] + 2 * c * x[1]
        g2 = a - 2 * b * x[1] + 2 * c * x[0]
        return np.array([mu * g1, mu * g2, 1 - mu])

    def cons(x):
        s = evaluate_points(problem, x[0], x[1])["slacks"]
        return np.concatenate([s, [x[2] - (x[0] - x[1]), x[2] - (x[1] - x[0])]])

    x0 = np.array([p1, p2, abs(p1 - p2)])
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = minimize(fun, x0, jac=jac, method="SLSQP",
                           bounds=[(0.0, pmax), (0.0, pmax), (0.0, pmax)],
                           constraints=[{"type": "ineq", "fun": cons}],
                           options={"ftol": 1e-13, "maxiter": 200})
        x = res.x
    except (ValueError, ArithmeticError):
        return None, math.inf, (p1, p2)
    if not np.all(np.isfinite(x)):
        return None, math.inf, (p1, p2)
    x1, x2 = float(np.clip(x[0], 0.0, pmax)), float(np.clip(x[1], 0.0, pmax))
    cand, viol = _candidate(problem, x1, x2, tau)
    return cand, viol, (x1, x2)


def solve(problem: ReducedProblem, tolerances: Tolerances = DEFAULT_TOLERANCES, *,
          initial_cells: int = 64, max_cells: int = 400_000) -> NegotiationSolution:
    """Globally minimize the weighted public expenditure over the price box.

    Cells are discarded when some constraint cannot be met anywhere inside them
    or when their objective lower bound is within ``objective_gap`` of the
    incumbent. Surviving cells are quartered until none remain, stopping no
    earlier than ``price_resolution`` only if bounds still overlap.
    """
    tau = tolerances.feasibility
    eps = tolerances.objective_gap
    pmax = problem.p_max
    min_width = tolerances.price_resolution * 1e-3

    edges = np.linspace(0.0, pmax, initial_cells + 1)[:-1]
    lo1, lo2 = (g.ravel() for g in np.meshgrid(edges, edges, indexing="ij"))
    width = pmax / initial_cells

    incumbent: Optional[_Candidate] = None
    closest = (math.inf, 0.0, 0.0)  # (violation, p1, p2) of the least-violating point seen
    floor = math.inf
    rounds = 0

    def consider(cand: Optional[_Candidate]) -> bool:
        nonlocal incumbent
        if cand is not None and cand.beats(incumbent):
            incumbent = cand
            return True
        return False

    while True:
        hi1, hi2 = lo1 + width, lo2 + width
        c1, c2 = lo1 + 0.5 * width, lo2 + 0.5 * width
        ev = evaluate_points(problem, c1, c2)
        viol = ev["max_violation"]
        i = int(np.argmin(viol))
        if viol[i] < closest[0]:
            closest = (float(viol[i]), float(c1[i]), float(c2[i]))

        feasible = viol <= tau
        if feasible.any():
            idx = np.flatnonzero(feasible)
            order = np.lexsort((c1[idx], np.abs(c1[idx] - c2[idx]), ev["objective"][idx]))
            j = idx[order[0]]
            best = _Candidate(float(c1[j]), float(c2[j]), float(ev["objective"][j]))
            if consider(best):
                polished, _, _ = _polish(problem, best.p1, best.p2, tau)
                consider(polished)
        elif incumbent is None:
            polished, pviol, pt = _polish(problem, closest[1], closest[2], tau)
            consider(polished)
            if pviol < closest[0]:
                closest = (pviol, pt[0], pt[1])

        obj_lb, slack_ub = _cell_bounds(problem, lo1, hi1, lo2, hi2)
        alive = slack_ub.min(axis=0) >= -tau
        if incumbent is None:
            keep = alive
        else:
            keep = alive & (obj_lb < incumbent.objective - eps)
            pruned = alive & ~keep
            if pruned.any():
                floor = min(floor, float(obj_lb[pruned].min()))
        if not keep.any():
            break
        if width <= min_width or 4 * int(keep.sum()) > max_cells:
            floor = min(floor, float(obj_lb[keep].min()))
            break

        lo1, lo2 = lo1[keep], lo2[keep]
        width *= 0.5
        lo1 = np.concatenate([lo1, lo1 + width, lo1, lo1 + width])
        lo2 = np.concatenate([lo2, lo2, lo2 + width, lo2 + width])
        rounds += 1

    if incumbent is None:
        ev = evaluate_point(problem, (closest[1], closest[2]))
        return NegotiationSolution(
            status=Status.INFEASIBLE,
            p_pub=(closest[1], closest[2]),
            q_pub=ev.q_pub,
            z=abs(closest[1] - closest[2]),
            objective=ev.objective,
            realized_profit=ev.profit,
            max_violation=ev.max_violation,
            certificate_gap=None,
            certificate=OptimalityCertificate(width, None, None, rounds),
        )

    # Final polish from the incumbent and its mirror image; only accepted if no worse.
    for start in ((incumbent.p1, incumbent.p2), (incumbent.p2, incumbent.p1)):
        polished, _, _ = _polish(problem, start[0], start[1], tau)
        consider(polished)

    return _finish(problem, incumbent, floor, width, rounds)


def _finish(problem: ReducedProblem, inc: _Candidate, floor: float, width: float,
            rounds: int) -> NegotiationSolution:
    ev = evaluate_point(problem, (inc.p1, inc.p2))
    q1, q2 = ev.q_pub
    interior = min(inc.p1, inc.p2, q1, q2) > INTERIOR_THRESHOLD
    gap = max(0.0, ev.objective - floor) if math.isfinite(floor) else 0.0
    return NegotiationSolution(
        status=Status.INTERIOR if interior else Status.BOUNDARY,
        p_pub=(inc.p1, inc.p2),
        q_pub=(q1, q2),
        z=abs(inc.p1 - inc.p2),
        objective=ev.objective,
        realized_profit=ev.profit,
        max_violation=ev.max_violation,
        certificate_gap=gap,
        certificate=OptimalityCertificate(width, ev.objective, gap, rounds),
    )


@dataclass(frozen=True)
class OracleResult:
    feasible: bool
    p_pub: tuple[float, float]
    objective: Optional[float]
    max_violation: float


def oracle_solve(problem: ReducedProblem, n: int = 2000, tau: float = 1e-6,
                 chunk: int = 200) -> OracleResult:
    """Best feasible point of the full n-by-n uniform grid over the price box.

    When no grid point is feasible, reports the least-violating grid point.
    """
    if n < 2:
        raise ValueError(f"grid resolution must be at least 2, got {n}")
    xs = np.linspace(0.0, problem.p_max, n)
    best_key = None
    best_pt = (0.0, 0.0)
    least = (math.inf, 0.0, 0.0)
    for start in range(0, n, chunk):
        rows = xs[start:start + chunk, None]
        ev = evaluate_points(problem, rows, xs[None, :])
        viol = ev["max_violation"]
        p1 = np.broadcast_to(rows, viol.shape)
        p2 = np.broadcast_to(xs[None, :], viol.shape)
        k = int(np.argmin(viol))
        if viol.flat[k] < least[0]:
            least = (float(viol.flat[k]), float(p1.flat[k]), float(p2.flat[k]))
        ok = viol <= tau
        if not ok.any():
            continue
        obj = np.where(ok, ev["objective"], np.inf)
        k = int(np.argmin(obj))
        # exact ties on a grid: prefer smaller gap, then smaller p1
        ties = np.flatnonzero(obj.ravel() <= obj.flat[k] + _TIE_EPS)
        gaps = np.abs(p1.ravel()[ties] - p2.ravel()[ties])
        k = ties[np.lexsort((p1.ravel()[ties], gaps))[0]]
        key = (float(obj.flat[k]), float(abs(p1.flat[k] - p2.flat[k])), float(p1.flat[k]))
        if best_key is None or key[0] < best_key[0] - _TIE_EPS or (
                abs(key[0] - best_key[0]) <= _TIE_EPS and key[1:] < best_key[1:]):
            best_key = key
            best_pt = (float(p1.flat[k]), float(p2.flat[k]))
    if best_key is None:
        return OracleResult(False, (least[1], least[2]), None, least[0])
    ev = evaluate_point(problem, best_pt)
    return OracleResult(True, best_pt, ev.objective, ev.max_violation)


def solve_scenario(scenario: ScenarioConfig, records: Sequence[HistoricalRecord],
                   tolerances: Tolerances = DEFAULT_TOLERANCES) -> tuple[ReducedProblem, NegotiationSolution]:
    """Full pipeline for one scenario: intercepts, slopes, equilibrium, negotiation."""
    problem = ReducedProblem.from_scenario(scenario, records)
    return problem, solve(problem, tolerances)
