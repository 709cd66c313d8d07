import json

import pytest

from slopekit.construction import assemble_tau, placeholder_background
from slopekit.core import Pattern, PeriodVector, validate_patch
from slopekit.fixtures import single_tile_system, yb_system
from slopekit.io import (
    ParseError,
    dump_patch,
    dump_tileset,
    dump_tm,
    dump_wang,
    dump_witness,
    grid_from_file,
    parse_patch,
    parse_patch_grid,
    parse_tileset,
    parse_tm,
    parse_witness,
    tile_counts,
    witness_patch_grid,
)
from slopekit.machine import immediate_halt_machine, run_tm, toy_corpus
from slopekit.periodicity import decide_periodic, realize_witness_patch
from slopekit.tmtiles import compile_tm

YB_TEXT = """slopekit-tileset v1
# the fixture
name yb
tiles Y B
forbid (0,0)=B; (0,1)=Y
forbid (0,0)=Y; (1,0)=B
forbid (0,0)=B; (1,0)=Y
"""


def rules_key(s):
    return sorted((r.shape, r.layers or (), sorted(r.forbidden)) for r in s.rules)


def test_parse_yb():
    s = parse_tileset(YB_TEXT)
    assert [t.name for t in s.tiles] == ["Y", "B"] and s.name == "yb"
    assert rules_key(s) == rules_key(yb_system())


@pytest.mark.parametrize("system", [yb_system(), single_tile_system(), yb_system().rotate(1)], ids=str)
def test_tileset_roundtrip(system):
    again = parse_tileset(dump_tileset(system))
    assert [t.name for t in again.tiles] == [t.name for t in system.tiles]
    assert rules_key(again) == rules_key(system)


def test_layered_roundtrip():
    s = assemble_tau(None, placeholder_background(2), ("C", "R", "A"))
    text = dump_tileset(s, ["layered"])
    again = parse_tileset(text)
    assert again.layer_names == s.layer_names
    assert [t.layers for t in again.tiles] == [t.layers for t in s.tiles]
    assert rules_key(again) == rules_key(s)
    assert dump_tileset(again, ["layered"]) == text


def test_wang_roundtrip():
    tiles = compile_tm(immediate_halt_machine())
    s = parse_tileset(dump_wang(tiles, "halt"))
    assert len(s) == len(tiles)
    # two tiles sit side by side exactly when their edge labels agree
    ids = {t.name: i for i, t in enumerate(tiles)}
    corner = ids["corner-sw"]
    assert validate_patch(s, Pattern.from_rows([[corner, ids["initS[_>h,_,S]"]]])) == []
    assert validate_patch(s, Pattern.from_rows([[corner, ids["inittape[_]"]]]))


@pytest.mark.parametrize("text, line, words", [
    ("slopekit-tileset v1\ntiles A\nforbid (0,0)=Q\n", 3, "unknown tile"),
    ("slopekit-tileset v1\ntiles A A\n", 2, "duplicate"),
    ("slopekit-tileset v1\ntiles A\nbogus 1\n", 3, "unknown directive"),
    ("slopekit-tileset v1\ntiles A\nforbid (0,0)A\n", 3, "bad cell"),
    ("slopekit-tileset v2\ntiles A\n", 1, ""),
    ("slopekit-tileset v1\n", 1, "no tiles"),
])
def test_tileset_errors_carry_line_numbers(text, line, words):
    with pytest.raises(ParseError) as e:
        parse_tileset(text, "f.tiles")
    assert e.value.line == line
    assert str(e.value).startswith(f"f.tiles:line {line}:")
    assert words in str(e.value)


@pytest.mark.parametrize("machine", toy_corpus(), ids=lambda m: m.name)
def test_tm_roundtrip(machine):
    again = parse_tm(dump_tm(machine))
    assert again.transitions == machine.transitions
    assert (again.initial, again.halting, again.alphabet, again.blank) == \
        (machine.initial, machine.halting, machine.alphabet, machine.blank)
    assert run_tm(again, "11", 6, 4).configurations == run_tm(machine, "11", 6, 4).configurations


def test_tm_errors():
    with pytest.raises(ParseError) as e:
        parse_tm("slopekit-tm v1\ninitial s0\nhalting h\ns0 1 -> h 1 X\n")
    assert e.value.line == 4


def test_patch_roundtrip():
    s = yb_system()
    p = Pattern.from_rows([[0, 0, 0], [1, 1, 1]]).translate(2, -1)
    text = dump_patch(s, p)
    assert parse_patch(s, text).as_dict() == p.as_dict()
    origin, grid = parse_patch_grid(text)
    assert origin == (2, -1) and grid == [["Y", "Y", "Y"], ["B", "B", "B"]]
    assert tile_counts(grid) == {"B": 3, "Y": 3}


def test_witness_roundtrip():
    s = yb_system()
    w = decide_periodic(s, PeriodVector(1, 0))
    patch = realize_witness_patch(s, w, 4, 6, (0, -3))
    text = dump_witness(s, w, patch)
    doc = json.loads(text)
    assert doc["vector"] == [1, 0] and doc["kind"] == "direction-only"
    again = parse_witness(s, text)
    assert (again.vector, again.kind, again.cycle_a, again.connector, again.cycle_b) == \
        (w.vector, w.kind, w.cycle_a, w.connector, w.cycle_b)
    assert realize_witness_patch(s, again, 4, 6, (0, -3)) == patch
    _, grid = witness_patch_grid(text)
    assert len(grid) == 6 and len(grid[0]) == 4
    assert grid_from_file(text)[1] == grid
    assert dump_witness(s, w, patch) == text
