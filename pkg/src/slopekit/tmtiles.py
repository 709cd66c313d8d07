"""Wang tiles simulating a Turing machine inside a framed rectangle.

Columns 1..w of a (w+2) x t rectangle hold the tape, columns 0 and w+1 are
the frame. Row 0 writes the input and performs the first step; the top
edge of row r is the configuration after r+1 steps; the top row only
accepts halting configurations. Horizontal edges carry a tape letter or a
(state, letter) head; vertical edges carry a state moving right, a state
moving left, or nothing. Keeping the two directions apart means heads are
never created or destroyed between two tiles.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import Pattern, TilingError, TilingSystem, WangTile, wang_to_patterns
from .machine import RunTrace, Transducer, TuringMachine, run_tm
from .search import DEFAULT_SEARCH_BUDGET, GridSearch, solve_grid

BORDER = "#"
SIDE = "|"
EMPTY = "."


def _head(s: str, a: str) -> tuple:
    return ("head", s, a)


def _letter(a: str) -> tuple:
    return ("tape", a)


def _state(s: str) -> tuple:
    return ("state", s)


def _rightward(s: str) -> tuple:
    return ("right", s)


def _leftward(s: str) -> tuple:
    return ("left", s)


INIT = "init"


def compile_tm(machine: TuringMachine) -> list[WangTile]:
    """Tile list for the machine; see `tile_count` for its size."""
    tiles: list[WangTile] = []
    add = tiles.append
    s0 = machine.initial
    init_label = (INIT, s0)
    sigma = machine.alphabet

    for (s, a), (s2, a2, mv) in sorted(machine.transitions.items()):
        tag = f"{s},{a}>{s2},{a2},{mv}"
        if mv == "L":
            add(WangTile(f"cmpL[{tag}]", _letter(a2), EMPTY, _head(s, a), _leftward(s2), "compute-L"))
        elif mv == "S":
            add(WangTile(f"cmpS[{tag}]", _head(s2, a2), EMPTY, _head(s, a), EMPTY, "compute-S"))
        else:
            add(WangTile(f"cmpR[{tag}]", _letter(a2), _rightward(s2), _head(s, a), EMPTY, "compute-R"))
    # first step, taken in row 0 by the head entering from the corner
    for (s, a), (s2, a2, mv) in sorted(machine.transitions.items()):
        if s != s0 or mv == "L":
            continue
        tag = f"{a}>{s2},{a2},{mv}"
        if mv == "S":
            add(WangTile(f"initS[{tag}]", _head(s2, a2), EMPTY, BORDER, init_label, "init-head", a))
        else:
            add(WangTile(f"initR[{tag}]", _letter(a2), _rightward(s2), BORDER, init_label, "init-head", a))
    for s in machine.states:
        for a in sigma:
            add(WangTile(f"initpass[{s},{a}]", _head(s, a), EMPTY, BORDER, _rightward(s), "init-tape", a))
    for s in machine.states:
        for a in sigma:
            # the head arrives from the west (passL) or from the east (passR)
            add(WangTile(f"passL[{s},{a}]", _head(s, a), EMPTY, _letter(a), _rightward(s), "pass-left"))
            add(WangTile(f"passR[{s},{a}]", _head(s, a), _leftward(s), _letter(a), EMPTY, "pass-right"))
    for a in sigma:
        add(WangTile(f"inittape[{a}]", _letter(a), EMPTY, BORDER, EMPTY, "init-tape", a))
        add(WangTile(f"tape[{a}]", _letter(a), EMPTY, _letter(a), EMPTY, "tape"))
        add(WangTile(f"toptape[{a}]", BORDER, EMPTY, _letter(a), EMPTY, "tape"))
    for h in sorted(machine.halting):
        for a in sigma:
            add(WangTile(f"halt[{h},{a}]", _head(h, a), EMPTY, _head(h, a), EMPTY, "halt"))
            add(WangTile(f"tophalt[{h},{a}]", BORDER, EMPTY, _head(h, a), EMPTY, "halt"))
    add(WangTile("corner-sw", SIDE, init_label, BORDER, BORDER, "border-corner"))
    add(WangTile("corner-se", SIDE, BORDER, BORDER, EMPTY, "border-corner"))
    add(WangTile("corner-nw", BORDER, EMPTY, SIDE, BORDER, "border-corner"))
    add(WangTile("corner-ne", BORDER, BORDER, SIDE, EMPTY, "border-corner"))
    add(WangTile("edge-w", SIDE, EMPTY, SIDE, BORDER, "border-edge"))
    add(WangTile("edge-e", SIDE, BORDER, SIDE, EMPTY, "border-edge"))
    return tiles


def tile_count(machine: TuringMachine) -> int:
    """D + D0 + 3*Q*G + 3*G + 2*H*G + 6.

    D transitions, D0 of them leaving the initial state without moving left,
    Q states (halting included), G letters, H halting states.
    """
    d = len(machine.transitions)
    d0 = sum(1 for (s, _), (_, _, mv) in machine.transitions.items() if s == machine.initial and mv != "L")
    q, g, h = len(machine.states), len(machine.alphabet), len(machine.halting)
    return d + d0 + 3 * q * g + 3 * g + 2 * h * g + 6


@dataclass(frozen=True)
class RectangleInstance:
    width: int
    height: int
    input: tuple[str, ...] = ()
    blank: str = "_"

    def __post_init__(self):
        if self.width < 2 or self.height < 1:
            raise TilingError("a framed rectangle needs width >= 2 and height >= 1")
        if self.width < len(self.input) + 2:
            raise TilingError("input does not fit between the borders")

    @classmethod
    def of(cls, w: int, t: int, word, blank: str = "_") -> "RectangleInstance":
        return cls(w + 2, t, tuple(word), blank)


def _frame_domains(tiles: list[WangTile], width: int, height: int, first_row=None):
    """Allowed tile ids per cell: outward edges are border, inward edges are not."""
    doms = {}
    for y in range(height):
        for x in range(width):
            want = {
                "west": x == 0, "east": x == width - 1,
                "south": y == 0, "north": y == height - 1,
            }
            ok = []
            for i, t in enumerate(tiles):
                if all((getattr(t, side) == BORDER) == out for side, out in want.items()):
                    if first_row is not None and y == 0 and 0 < x < width - 1 and t.letter != first_row[x - 1]:
                        continue
                    ok.append(i)
            doms[(x, y)] = ok
    return doms


def rectangle_tileable(tiles: list[WangTile], instance: RectangleInstance,
                       budget: int = DEFAULT_SEARCH_BUDGET) -> Pattern | None:
    """First valid framed fill in row-major order, or None."""
    system = wang_to_patterns(tiles)
    w = instance.width - 2
    row = list(instance.input) + [instance.blank] * (w - len(instance.input))
    doms = _frame_domains(tiles, instance.width, instance.height, row)
    return solve_grid(system, instance.width, instance.height, doms, budget)


def read_configurations(tiles: list[WangTile], fill: Pattern) -> list[tuple[tuple[str, ...], int, str]]:
    """Configurations on the top edges of rows 0..t-2 (after steps 1..t-1)."""
    d = fill.as_dict()
    width = fill.width
    height = fill.height
    out = []
    for y in range(height - 1):
        tape, head, state = [], -1, ""
        for x in range(1, width - 1):
            lab = tiles[d[(x, y)]].north
            if lab[0] == "head":
                head, state = x - 1, lab[1]
                tape.append(lab[2])
            else:
                tape.append(lab[1])
        out.append((tuple(tape), head, state))
    return out


def check_simulation_equivalence(machine: TuringMachine, word, t: int, w: int,
                                 budget: int = DEFAULT_SEARCH_BUDGET) -> bool:
    """Halting within t-1 steps on w cells agrees with tiling the (w+2) x t rectangle.

    Row 0 already performs the first step and the top row performs none, so
    t rows fit exactly t-1 steps: "time less than t".
    """
    word = tuple(word)
    run = run_tm(machine, word, max_time=t - 1, max_space=w)
    if len(word) > w:
        tiled = False
    else:
        tiled = rectangle_tileable(compile_tm(machine), RectangleInstance.of(w, t, word, machine.blank),
                                   budget) is not None
    return run.halted == tiled


# ----- transducer strips


def transducer_to_tiles(t: Transducer) -> list[WangTile]:
    """One tile per rule (state in west, out east, input south, output north) plus delimiters."""
    tiles = []
    for s, a, b, s2 in t.rules:
        tiles.append(WangTile(f"{s}:{a}|{b}:{s2}", _letter(b), _state(s2), _letter(a), _state(s),
                              "transducer", a))
    for s in sorted(t.initial):
        tiles.append(WangTile(f"start[{s}]", SIDE, _state(s), SIDE, BORDER, "delimiter"))
    for s in sorted(t.accepting):
        tiles.append(WangTile(f"stop[{s}]", SIDE, BORDER, SIDE, _state(s), "delimiter"))
    return tiles


def transducer_strip(t: Transducer, word: str, height: int,
                     budget: int = DEFAULT_SEARCH_BUDGET) -> list[str] | None:
    """Rows (bottom first) of a valid strip whose first row reads `word`.

    Each row's north letters are the next row's south letters, so the rows
    list successive transducer images. Returns None when no strip exists.
    """
    tiles = transducer_to_tiles(t)
    width = len(word) + 2
    doms = {}
    for y in range(height):
        for x in range(width):
            ok = []
            for i, tl in enumerate(tiles):
                if x == 0:
                    good = tl.west == BORDER and tl.kind == "delimiter"
                elif x == width - 1:
                    good = tl.east == BORDER and tl.kind == "delimiter"
                else:
                    good = tl.kind == "transducer" and (y > 0 or tl.letter == word[x - 1])
                if good:
                    ok.append(i)
            doms[(x, y)] = ok
    fill = solve_grid(wang_to_patterns(tiles), width, height, doms, budget)
    if fill is None:
        return None
    d = fill.as_dict()
    return ["".join(tiles[d[(x, y)]].letter for x in range(1, width - 1)) for y in range(height)]


def wang_system(machine: TuringMachine) -> TilingSystem:
    return wang_to_patterns(compile_tm(machine), name=machine.name or "tm")
