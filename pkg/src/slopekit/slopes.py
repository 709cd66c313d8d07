"""Budgeted search for slopes of periodicity."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .core import INFINITY, PeriodVector, Slope, TilingSystem
from .periodicity import (
    DEFAULT_NODE_BUDGET,
    BudgetExceeded,
    Kind,
    PeriodicWitness,
    decide_periodic,
)


@dataclass(frozen=True)
class SlopeQuery:
    slope: Slope
    max_multiple: int = 1
    node_budget: int = DEFAULT_NODE_BUDGET

    def __post_init__(self):
        if self.max_multiple < 1:
            raise ValueError("max_multiple must be at least 1")


@dataclass
class SemiResult:
    slope: Slope
    witness: PeriodicWitness | None
    tested: list[PeriodVector] = field(default_factory=list)
    budget_hit: bool = False

    @property
    def found(self) -> bool:
        return self.witness is not None


@dataclass
class SlopeReport:
    found: list[tuple[Slope, PeriodicWitness]]
    exhausted: list[Slope]
    unknown: list[Slope]
    budget: dict

    @property
    def found_slopes(self) -> list[Slope]:
        return [s for s, _ in self.found]

    def lines(self) -> list[str]:
        out = []
        hit = {s.fraction(): w for s, w in self.found}
        unknown = {s.fraction() for s in self.unknown}
        for s in self.budget["schedule"]:
            if s in hit:
                v = hit[s].vector
                out.append(f"SLOPE {s} FOUND vector=({v.p},{v.q})")
            elif s in unknown:
                out.append(f"SLOPE {s} UNKNOWN budget=nodes:{self.budget['node_budget']}")
            else:
                out.append(f"SLOPE {s} UNKNOWN budget=multiples:{self.budget['max_multiple']}")
        return out

    def to_json(self) -> str:
        return json.dumps({
            "found": [{"slope": s.fraction(), "vector": [w.vector.p, w.vector.q], "kind": w.kind.value}
                      for s, w in self.found],
            "exhausted": [s.fraction() for s in self.exhausted],
            "unknown": [s.fraction() for s in self.unknown],
            "budget": self.budget,
        }, sort_keys=True)


def probe_vector(slope: Slope, m: int) -> PeriodVector:
    return slope.direction().scaled(m)


def slope_semidecide(system: TilingSystem, query: SlopeQuery) -> SemiResult:
    """Try m * direction for m = 1..max_multiple; stop at the first direction-only witness."""
    res = SemiResult(query.slope, None)
    for m in range(1, query.max_multiple + 1):
        v = probe_vector(query.slope, m)
        res.tested.append(v)
        try:
            w = decide_periodic(system, v, query.node_budget)
        except BudgetExceeded:
            res.budget_hit = True
            continue
        if w is not None and w.kind is Kind.DIRECTION_ONLY:
            res.witness = w
            return res
    return res


def stern_brocot(bound: int) -> list[Fraction]:
    """Positive reduced fractions with numerator and denominator <= bound, breadth first."""
    out = []
    dq = deque([((0, 1), (1, 0))])
    while dq:
        (a, b), (c, d) = dq.popleft()
        num, den = a + c, b + d
        if num > bound or den > bound:
            continue
        out.append(Fraction(num, den))
        dq.append(((a, b), (num, den)))
        dq.append(((num, den), (c, d)))
    return out


def slope_schedule(bound: int) -> list[Slope]:
    """0, positives, negatives (same order, mirrored), then infinity."""
    pos = stern_brocot(bound)
    return ([Slope(0, 1)]
            + [Slope(f.numerator, f.denominator) for f in pos]
            + [Slope(-f.numerator, f.denominator) for f in pos]
            + [INFINITY])


def enumerate_slopes(system: TilingSystem, max_multiple: int = 2, slope_bound: int = 2,
                     node_budget: int = DEFAULT_NODE_BUDGET) -> SlopeReport:
    """Dovetail the semi-decision over all slopes up to the bound.

    The schedule is round robin: for each multiple m, every slope not yet
    found is probed at m times its direction.
    """
    if slope_bound < 1 or max_multiple < 1:
        raise ValueError("bounds must be at least 1")
    schedule = slope_schedule(slope_bound)
    found: dict[Slope, PeriodicWitness] = {}
    hit_budget: set[Slope] = set()
    for m in range(1, max_multiple + 1):
        for s in schedule:
            if s in found:
                continue
            try:
                w = decide_periodic(system, probe_vector(s, m), node_budget)
            except BudgetExceeded:
                hit_budget.add(s)
                continue
            if w is not None and w.kind is Kind.DIRECTION_ONLY:
                found[s] = w
    return SlopeReport(
        found=[(s, found[s]) for s in schedule if s in found],
        exhausted=[s for s in schedule if s not in found and s not in hit_budget],
        unknown=[s for s in schedule if s not in found and s in hit_budget],
        budget={"max_multiple": max_multiple, "slope_bound": slope_bound,
                "node_budget": node_budget, "schedule": [s.fraction() for s in schedule]},
    )
