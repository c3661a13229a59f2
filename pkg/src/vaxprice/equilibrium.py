"""Exogenous private-sector price competition (symmetric surplus-regime equilibrium)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .market import DemandCurve, DomainError, ManufacturerParams, PrivateEquilibrium


def surplus_bound_factor(gamma: float) -> float:
    """U / a_priv as a function of product similarity."""
    if not 0 < gamma < 1:
        raise DomainError(f"gamma must lie in (0,1), got {gamma}")
    inner = 2.0 * math.sqrt(1.0 - gamma) / (math.sqrt(1.0 + gamma) * (2.0 - gamma))
    return (1.0 + gamma) / gamma * (1.0 - inner)


def private_equilibrium(curve: DemandCurve, gamma: float) -> PrivateEquilibrium:
    """Shared private price ``a_priv/(2b-c)``, quantity ``b*p_priv`` and the bound U."""
    denom = 2.0 * curve.b - curve.c
    if denom <= 0:
        raise DomainError(f"2b - c must be positive, got {denom}")
    p_priv = curve.a_priv / denom
    return PrivateEquilibrium(
        p_priv=p_priv,
        q_priv=curve.b * p_priv,
        surplus_bound=curve.a_priv * surplus_bound_factor(gamma),
    )


@dataclass(frozen=True)
class SurplusHeadroom:
    """Largest public quantity each manufacturer may sell while staying in the surplus regime."""

    headroom: tuple[float, float]
    admissible: tuple[bool, bool]

    @property
    def all_admissible(self) -> bool:
        return all(self.admissible)


def check_surplus_regime(
    equilibrium: PrivateEquilibrium, params: Sequence[ManufacturerParams]
) -> SurplusHeadroom:
    headroom = tuple(p.capacity - equilibrium.surplus_bound for p in params)
    return SurplusHeadroom(headroom=headroom, admissible=tuple(h >= 0 for h in headroom))
