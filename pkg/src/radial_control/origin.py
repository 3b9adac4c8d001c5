"""Behaviour of the value function at the origin for singular costs."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass

from .cost import Growth, Monotone, RadialCost
from .errors import InconsistentDeclaration


class Regime(str, enum.Enum):
    FINITE_EQUALS_V = "FiniteEqualsV"
    MINUS_INFINITY_EVERYWHERE = "MinusInfinityEverywhere"
    PLUS_INFINITY_AT_ORIGIN = "PlusInfinityAtOrigin"
    WEAK_FINITE_STRONG_OPEN = "WeakFiniteStrongOpen"


@dataclass(frozen=True)
class OriginClassification:
    regime: Regime
    v0: float | None
    notes: str

    def to_dict(self):
        return {"regime": self.regime.value, "v0": self.v0, "notes": self.notes}

    def to_json(self):
        return json.dumps(self.to_dict())


def classify_regime(monotone: Monotone, growth: Growth, dimension: int):
    """Regime and explanatory note for the declared behaviour near the origin."""
    monotone, growth = Monotone(monotone), Growth(growth)
    if dimension < 2:
        raise InconsistentDeclaration("dimension must be at least 2")
    if monotone is Monotone.INCREASING:
        if growth.f_integrable:
            return Regime.FINITE_EQUALS_V, "radial motion near the origin; value finite everywhere"
        if growth is Growth.NEGATIVE_NON_INTEGRABLE:
            return (Regime.MINUS_INFINITY_EVERYWHERE,
                    "radial passes through the origin collect unbounded negative cost")
        raise InconsistentDeclaration(
            f"a cost increasing near the origin cannot have {growth.value} growth (it would tend to +inf)")
    if growth.f_integrable:
        return Regime.FINITE_EQUALS_V, "tangential motion near the origin; value finite everywhere"
    if growth is Growth.NON_INTEGRABLE_SF:
        return Regime.PLUS_INFINITY_AT_ORIGIN, "value is +inf at the origin and finite elsewhere"
    if growth is Growth.INTEGRABLE_SF_ONLY:
        if dimension >= 3:
            return Regime.FINITE_EQUALS_V, "finite at the origin; strong and weak values agree for d >= 3"
        return (Regime.WEAK_FINITE_STRONG_OPEN,
                "v0 is the weak-formulation value; equality with the strong value is unresolved for d = 2")
    raise InconsistentDeclaration(
        f"a cost decreasing near the origin cannot have {growth.value} growth (it would tend to -inf)")


def classify_origin(cost: RadialCost) -> OriginClassification:
    regime, notes = classify_regime(cost.origin_monotone, cost.origin_growth, cost.dimension)
    v0 = None
    if regime in (Regime.FINITE_EQUALS_V, Regime.WEAK_FINITE_STRONG_OPEN):
        from .switching import build_schedule
        from .value import build_value

        v0 = build_value(cost, build_schedule(cost)).alpha_const
        if not math.isfinite(v0):
            raise InconsistentDeclaration("declared growth implies a finite value but V(0) diverges")
    return OriginClassification(regime, v0, notes)
