import json
import math
from fractions import Fraction

import pytest

from slopekit.core import INFINITY, PeriodVector, Slope
from slopekit.fixtures import free_system, single_tile_system, yb_system
from slopekit.slopes import (
    SlopeQuery,
    enumerate_slopes,
    probe_vector,
    slope_schedule,
    slope_semidecide,
    stern_brocot,
)


def test_stern_brocot_order():
    assert stern_brocot(1) == [Fraction(1)]
    assert stern_brocot(2) == [Fraction(1), Fraction(1, 2), Fraction(2)]
    assert stern_brocot(3) == [Fraction(1), Fraction(1, 2), Fraction(2), Fraction(1, 3),
                               Fraction(2, 3), Fraction(3, 2), Fraction(3)]


@pytest.mark.parametrize("bound", range(1, 9))
def test_stern_brocot_covers_all_reduced_fractions(bound):
    got = stern_brocot(bound)
    want = {Fraction(a, b) for a in range(1, bound + 1) for b in range(1, bound + 1) if math.gcd(a, b) == 1}
    assert len(got) == len(set(got)) == len(want)
    assert set(got) == want


def test_schedule():
    assert [str(s) for s in slope_schedule(2)] == ["0", "1", "1/2", "2", "-1", "-1/2", "-2", "inf"]
    assert slope_schedule(1)[-1] is INFINITY


def test_probe_vector():
    assert probe_vector(Slope(1, 2), 3) == PeriodVector(6, 3)
    assert probe_vector(Slope(-2, 1), 1) == PeriodVector(1, -2)
    assert probe_vector(INFINITY, 2) == PeriodVector(0, 2)


def test_query_validation():
    with pytest.raises(ValueError):
        SlopeQuery(Slope(0, 1), max_multiple=0)


def test_semidecide_yb():
    res = slope_semidecide(yb_system(), SlopeQuery(Slope(0, 1), 2))
    assert res.found and res.tested == [PeriodVector(1, 0)]
    res = slope_semidecide(yb_system(), SlopeQuery(Slope(1, 1), 2))
    assert not res.found and res.tested == [PeriodVector(1, 1), PeriodVector(2, 2)]
    assert not res.budget_hit


def test_yb_report():
    rep = enumerate_slopes(yb_system(), 2, 2)
    assert [str(s) for s in rep.found_slopes] == ["0"]
    assert len(rep.exhausted) == 7 and rep.unknown == []
    lines = rep.lines()
    assert lines[0] == "SLOPE 0/1 FOUND vector=(1,0)"
    assert lines[-1] == "SLOPE inf UNKNOWN budget=multiples:2"
    doc = json.loads(rep.to_json())
    assert doc["found"] == [{"slope": "0/1", "vector": [1, 0], "kind": "direction-only"}]


def test_free_system_has_every_slope():
    rep = enumerate_slopes(free_system(2), 1, 2)
    assert [str(s) for s in rep.found_slopes] == [str(s) for s in slope_schedule(2)]


def test_single_tile_has_none():
    rep = enumerate_slopes(single_tile_system(), 2, 2)
    assert rep.found == [] and len(rep.exhausted) == 8


def test_node_budget_marks_unknown():
    rep = enumerate_slopes(free_system(3), 1, 1, node_budget=5)
    assert rep.found == [] and len(rep.unknown) == 4
    assert all("budget=nodes:5" in ln for ln in rep.lines())


def test_reports_are_repeatable():
    a = enumerate_slopes(yb_system().rotate(1), 2, 3)
    b = enumerate_slopes(yb_system().rotate(1), 2, 3)
    assert a.lines() == b.lines() and a.to_json() == b.to_json()
    assert [str(s) for s in a.found_slopes] == ["inf"]
