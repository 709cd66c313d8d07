import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slopekit.core import Pattern, Tile, TilingSystem, validate_patch
from slopekit.fixtures import free_system, yb_system
from slopekit.search import GridSearch, SearchBudgetExceeded, all_fills, solve_grid


def brute_fills(system, w, h, domains=None):
    cells = [(x, y) for y in range(h) for x in range(w)]
    out = []
    for ids in itertools.product(range(len(system)), repeat=len(cells)):
        grid = dict(zip(cells, ids))
        if domains and any(grid[c] not in domains[c] for c in domains):
            continue
        if not validate_patch(system, grid):
            out.append(Pattern.from_dict(grid))
    return out


def test_yb_counts():
    # rows are monochrome and blue rows sit above yellow rows: h + 1 fills
    for w, h in [(1, 1), (2, 2), (3, 2), (2, 4)]:
        fills = all_fills(yb_system(), w, h)
        assert len(fills) == h + 1
        assert {f.cells for f in fills} == {f.cells for f in brute_fills(yb_system(), w, h)}


def test_domains_restrict():
    doms = {(0, 0): [1]}
    fills = all_fills(yb_system(), 2, 2, doms)
    assert [f.as_dict()[(1, 1)] for f in fills] == [1]
    assert solve_grid(yb_system(), 2, 2, {(0, 1): [0], (0, 0): [1]}) is None


def test_budget_is_enforced():
    with pytest.raises(SearchBudgetExceeded):
        all_fills(free_system(3), 3, 3, budget=50)


def test_first_solution_is_row_major_smallest():
    f = solve_grid(free_system(2), 2, 2)
    assert set(f.as_dict().values()) == {0}


def test_empty_grid_rejected():
    with pytest.raises(ValueError):
        GridSearch(yb_system(), 0, 3)


def rules_from(bits, tiles):
    shapes = [((0, 0), (1, 0)), ((0, 0), (0, 1)), ((0, 0), (1, 1)), ((0, 1), (1, 0))]
    forbid = []
    i = 0
    for shape in shapes:
        for a, b in itertools.product(range(tiles), repeat=2):
            if bits >> i & 1:
                forbid.append(Pattern.from_dict({shape[0]: a, shape[1]: b}))
            i += 1
    return TilingSystem([Tile(t, f"t{t}") for t in range(tiles)], forbid)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2 ** 16 - 1), st.integers(1, 3), st.integers(1, 3))
def test_matches_brute_force(bits, w, h):
    s = rules_from(bits, 2)
    assert {f.cells for f in all_fills(s, w, h)} == {f.cells for f in brute_fills(s, w, h)}


def test_three_cell_rule():
    s = TilingSystem(["a", "b"], [Pattern.from_dict({(0, 0): 0, (1, 0): 0, (2, 0): 0})])
    fills = all_fills(s, 4, 1)
    # 16 words minus 0000, 0001 and 1000
    assert len(fills) == len(brute_fills(s, 4, 1)) == 13
