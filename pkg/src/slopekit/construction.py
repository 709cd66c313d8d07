"""Layered tiling system whose skeleton is a lattice of equal squares.

Every product tile has a class (white, black, or one of the column roles)
stored on an extra leading layer "K"; each layer says which of its symbols
may sit on each class and gives forbidden patterns over (K, own layer) keys.

Geometry used throughout: a strip lies between two column lines at
distance n; its own black rows are n apart. Within a strip, relative to a
black row at height 0, the next strip's rows sit at height D (the offset).

Layers:
  C   background whites, black rows and column roles
  R   the Wang layer that forces squares
  W   prolongation lines and the signals that equalise offsets and spacing
  S   arrows copying the first column of a strip into the next strip
  P_TM  the machine run inside each square (framed rectangle)
  A   yellow/blue coloring of squares
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterable, Sequence

from .core import (Cell, Pattern, PeriodicConfig, PeriodVector, Rule, Slope, Tile, TilingError, TilingSystem,
                   check_east_deterministic)
from .machine import TuringMachine, encode_pair, increment_iterate, reduce_binary_pair
from .search import DEFAULT_SEARCH_BUDGET, GridSearch, solve_grid
from .tmtiles import BORDER, RectangleInstance, compile_tm, rectangle_tileable

WHITE, BLACK = "white", "black"
LEFTMOST, RIGHTMOST = "leftmost", "rightmost"
BETWEEN_RL, BETWEEN_LR = "betweenrl", "betweenlr"
JUNCTION = "junction"
CLASSES = (WHITE, BLACK, LEFTMOST, BETWEEN_RL, RIGHTMOST, BETWEEN_LR, JUNCTION)
VERTICAL = frozenset({LEFTMOST, BETWEEN_RL, RIGHTMOST, BETWEEN_LR, JUNCTION})
INTERIOR = frozenset({WHITE, BLACK})
LAYER_ORDER = ("C", "R", "W", "S", "P_TM", "A")

H_PAIR = ((0, 0), (1, 0))
V_PAIR = ((0, 0), (0, 1))
NE_PAIR = ((0, 0), (1, 1))   # lower-left, upper-right
SE_PAIR = ((0, 1), (1, 0))   # upper-left, lower-right


class ConstructionError(ValueError):
    pass


class AlphabetTooLarge(RuntimeError):
    def __init__(self, count: int, bound: int):
        self.count = count
        self.bound = bound
        super().__init__(f"product alphabet has {count} tiles, bound is {bound}")


@dataclass(frozen=True)
class LayerRule:
    shape: tuple[Cell, ...]
    layers: tuple[str, ...]
    forbidden: frozenset


@dataclass
class LayerSpec:
    name: str
    alphabet: tuple[str, ...]
    superposition: dict[str, tuple[str, ...]]
    rules: list[LayerRule] = field(default_factory=list)
    notes: str = ""

    def __post_init__(self):
        for cls, syms in self.superposition.items():
            if cls not in CLASSES:
                raise ConstructionError(f"layer {self.name}: unknown class {cls!r}")
            bad = set(syms) - set(self.alphabet)
            if bad:
                raise ConstructionError(f"layer {self.name}: symbols {sorted(bad)} not in alphabet")

    @property
    def rule_count(self) -> int:
        return sum(len(r.forbidden) for r in self.rules)


@dataclass(frozen=True)
class Background:
    system: TilingSystem
    determinism: str = "east"
    name: str = ""

    def __post_init__(self):
        if self.determinism not in ("east", "north", "none"):
            raise ConstructionError(f"unknown determinism {self.determinism!r}")
        if self.determinism == "east" and not check_east_deterministic(self.system):
            raise ConstructionError("background is not east-deterministic")


def placeholder_background(tiles: int = 1) -> Background:
    """Periodic stand-in for an aperiodic background.

    One tile: no rules. Two tiles: horizontal neighbours must differ, so
    the west tile forces the east one.
    """
    names = [f"g{i}" for i in range(tiles)]
    if tiles == 1:
        return Background(TilingSystem(names, name="bg1"), "east", "placeholder-1")
    if tiles == 2:
        same = frozenset({(0, 0), (1, 1)})
        return Background(TilingSystem(names, rules=[Rule(H_PAIR, same)], name="bg2"),
                          "east", "placeholder-2")
    raise ConstructionError("placeholder backgrounds have 1 or 2 tiles")


def _white_symbol(name: str) -> str:
    return "w:" + name


def _forbid(shape, layers, universe, ok: Callable[..., bool]) -> LayerRule:
    """Forbid every tuple of keys from `universe` rejected by `ok`."""
    bad = frozenset(keys for keys in product(universe, repeat=len(shape)) if not ok(*keys))
    return LayerRule(shape, layers, bad)


def _universe(spec: LayerSpec) -> list[tuple[str, str]]:
    return [(cls, s) for cls in CLASSES for s in spec.superposition.get(cls, ())]


# ----- C


def gen_component_C(bg: Background, junctions: bool = False) -> LayerSpec:
    """Whites from the background, black rows, and column roles.

    Up a column the roles cycle leftmost, betweenrl*, rightmost,
    betweenlr*, leftmost; the between runs may be empty. The optional
    junction role is a leftmost and a rightmost at once (offset 0).
    """
    if bg.determinism == "east" and not check_east_deterministic(bg.system):
        raise ConstructionError("background is not east-deterministic")
    whites = tuple(_white_symbol(t.name) for t in bg.system.tiles)
    roles = [BLACK, LEFTMOST, BETWEEN_RL, RIGHTMOST, BETWEEN_LR] + ([JUNCTION] if junctions else [])
    sup = {WHITE: whites, **{r: (r,) for r in roles}}
    spec = LayerSpec("C", whites + tuple(roles), sup)
    uni = _universe(spec)
    above = {
        LEFTMOST: {BETWEEN_RL, RIGHTMOST},
        BETWEEN_RL: {BETWEEN_RL, RIGHTMOST},
        RIGHTMOST: {BETWEEN_LR, LEFTMOST, JUNCTION},
        BETWEEN_LR: {BETWEEN_LR, LEFTMOST, JUNCTION},
        JUNCTION: {BETWEEN_LR, LEFTMOST, JUNCTION},
    }

    def horiz(a, b):
        if b[0] == BLACK and a[0] not in (BLACK, LEFTMOST, JUNCTION):
            return False
        if a[0] == BLACK and b[0] not in (BLACK, RIGHTMOST, JUNCTION):
            return False
        return True

    def vert(a, b):
        if BLACK in (a[0], b[0]) and WHITE not in (a[0], b[0]):
            return False
        if a[0] in above and b[0] not in above[a[0]]:
            return False
        return True

    spec.rules.append(_forbid(H_PAIR, ("K", "C"), uni, horiz))
    spec.rules.append(_forbid(V_PAIR, ("K", "C"), uni, vert))

    # background rules act on whites; vertical ones also jump over one black row
    to_sym = {t.id: _white_symbol(t.name) for t in bg.system.tiles}
    for r in bg.system.rules:
        if r.layers is not None or len(r.shape) != 2 or r.shape not in (H_PAIR, V_PAIR):
            raise ConstructionError("backgrounds must be given by domino rules")
        bad = frozenset(tuple(to_sym[t] for t in b) for b in r.forbidden)
        spec.rules.append(LayerRule(r.shape, ("C",), frozenset(tuple((s,) for s in b) for b in bad)))
        if r.shape == V_PAIR:
            gap = frozenset(((lo,), (BLACK,), (hi,)) for lo, hi in bad)
            spec.rules.append(LayerRule(((0, 0), (0, 1), (0, 2)), ("C",), gap))
    spec.notes = "between runs may be empty; junction role only when enabled"
    return spec


# ----- R

R_EDGES = {
    # name: (north, east, south, west); N/S halves read left to right, E/W bottom to top
    "vert": ("LR", "RR", "LR", "LL"),
    "horiz": ("RR", "LR", "LL", "LR"),
    "diag": ("LL", "LL", "RR", "RR"),
    "fillL": ("LL", "LL", "LL", "LL"),
    "fillR": ("RR", "RR", "RR", "RR"),
    "joinL": ("LR", "LR", "LR", "LL"),
    "joinR": ("LR", "RR", "LR", "LR"),
    "joinLR": ("LR", "LR", "LR", "LR"),
}


def gen_component_R(junctions: bool = False) -> LayerSpec:
    sup = {
        WHITE: ("fillL", "fillR", "diag"),
        BLACK: ("horiz",),
        LEFTMOST: ("joinL",),
        RIGHTMOST: ("joinR",),
        BETWEEN_RL: ("vert",),
        BETWEEN_LR: ("vert",),
    }
    alphabet = ("vert", "horiz", "diag", "fillL", "fillR", "joinL", "joinR")
    if junctions:
        sup[JUNCTION] = ("joinLR",)
        alphabet += ("joinLR",)
    spec = LayerSpec("R", alphabet, sup)
    syms = [(s,) for s in alphabet]
    spec.rules.append(_forbid(H_PAIR, ("R",), syms, lambda a, b: R_EDGES[a[0]][1] == R_EDGES[b[0]][3]))
    spec.rules.append(_forbid(V_PAIR, ("R",), syms, lambda a, b: R_EDGES[a[0]][0] == R_EDGES[b[0]][2]))
    return spec


# ----- W

W_WHITE_FLAGS = "abcdo"
W_BLACK_FLAGS = "cdho"


def w_symbol(flags: Iterable[str]) -> str:
    f = "".join(sorted(set(flags)))
    return "w" + (f or "-")


def w_flags(sym: str) -> frozenset[str]:
    return frozenset(sym[1:]) - {"-"}


def _subsets(letters: str) -> list[str]:
    out = []
    for mask in range(1 << len(letters)):
        out.append(w_symbol(c for i, c in enumerate(letters) if mask >> i & 1))
    return sorted(set(out))


def gen_component_W(junctions: bool = False) -> LayerSpec:
    """Flags on strip cells:

    o  row where the left neighbour strip's black row ends (prolonged right)
    d  row where the right neighbour strip's black row starts (prolonged left)
    a  down-right arm of the offset signal, started under a d row at the left column
    h  the arm hitting the strip's own black row
    b  down-left arm after the hit; it must land on the left column exactly
       where the left neighbour's row ends, so both offsets are equal
    c  diagonal sent from each left-neighbour row end; one strip width later
       it must meet an o row, so neighbouring spacings are equal
    """
    whites = _subsets(W_WHITE_FLAGS)
    blacks = _subsets(W_BLACK_FLAGS)
    sup = {WHITE: tuple(whites), BLACK: tuple(blacks)}
    for r in (LEFTMOST, BETWEEN_RL, RIGHTMOST, BETWEEN_LR) + ((JUNCTION,) if junctions else ()):
        sup[r] = ("w-",)
    alphabet = tuple(sorted(set(whites) | set(blacks)))
    spec = LayerSpec("W", alphabet, sup)
    uni = _universe(spec)
    ends_left = {RIGHTMOST, JUNCTION}
    starts_right = {LEFTMOST, JUNCTION}

    def f(k):
        return w_flags(k[1])

    def inner(k):
        return k[0] in INTERIOR

    def horiz(a, b):
        if inner(a) and inner(b):
            return ("d" in f(a)) == ("d" in f(b)) and ("o" in f(a)) == ("o" in f(b))
        if inner(a) and b[0] in VERTICAL:
            return ("d" in f(a)) == (b[0] in starts_right)
        if a[0] in VERTICAL and inner(b):
            if ("o" in f(b)) != (a[0] in ends_left):
                return False
            if (a[0] == JUNCTION) != ("d" in f(b) and b[0] == BLACK):
                return False
        return True

    def down_right(p, q):
        # p upper-left, q lower-right
        if p[0] in VERTICAL and inner(q):
            return ("c" in f(q)) == (p[0] in ends_left)
        if inner(p) and inner(q):
            arrive = "a" in f(q) or "h" in f(q)
            return ("a" in f(p)) == arrive and ("c" in f(p)) == ("c" in f(q))
        if inner(p) and q[0] in VERTICAL:
            return "a" not in f(p)
        return True

    def up_right(q, p):
        # q lower-left, p upper-right; the b arm runs from p down to q
        src = inner(p) and ("h" in f(p) or "b" in f(p))
        if inner(q):
            return ("b" in f(q)) == src
        if q[0] in VERTICAL and src:
            return q[0] in ends_left
        return True

    spec.rules.append(_forbid(H_PAIR, ("K", "W"), uni, horiz))
    spec.rules.append(_forbid(SE_PAIR, ("K", "W"), uni, down_right))
    spec.rules.append(_forbid(NE_PAIR, ("K", "W"), uni, up_right))

    # arm start: shape cells sorted are (0,1) column, (1,0) lower, (1,1) upper
    def arm_start(col, lower, upper):
        if col[0] not in VERTICAL or not inner(lower) or not inner(upper):
            return True
        fired = "d" in f(upper) and upper[0] == WHITE
        return ("a" in f(lower) or "h" in f(lower)) == fired

    spec.rules.append(_forbid(((0, 1), (1, 0), (1, 1)), ("K", "W"), uni, arm_start))

    # landing of c one strip width later: cells (0,0) lower, (0,1) upper, (1,0) column
    def landing(lower, upper, col):
        if col[0] not in VERTICAL or not inner(lower) or not inner(upper):
            return True
        return "c" not in f(upper) or "o" in f(lower)

    spec.rules.append(_forbid(((0, 0), (0, 1), (1, 0)), ("K", "W"), uni, landing))
    spec.notes = "flags a,b,c,d,h,o; see gen_component_W docstring"
    return spec


# ----- S

def s_symbol(arrow: str, gray: bool, copy: str) -> str:
    return f"{arrow}{int(gray)}:{copy}"


def s_parts(sym: str) -> tuple[str, bool, str]:
    head, _, copy = sym.partition(":")
    return head[0], head[1] == "1", copy


def gen_component_S(bg: Background, junctions: bool = False) -> LayerSpec:
    """Arrows that carry a copy of each strip's first column into the next strip.

    Every cell holds an arrow (r: east, d: north-east) and a copied
    background symbol; the cell an arrow points to holds the same copy. In a
    strip with offset D the last D interior columns point north-east, so
    the copy of row y lands on row y + D of the next strip's first column,
    where it must equal the actual background tile. Gray marks the bottom
    interior row up to the diagonal region and the diagonal from there to
    the next strip's leftmost tile, which pins the region's width to D.
    """
    if bg.determinism != "east":
        raise ConstructionError("transmission needs an east-deterministic background")
    copies = [t.name for t in bg.system.tiles]
    white_syms = tuple(s_symbol(a, g, c) for a in "rd" for g in (False, True) for c in copies)
    black_syms = tuple(s_symbol(a, False, c) for a in "rd" for c in copies)
    col_syms = tuple(s_symbol("r", False, c) for c in copies)
    sup = {WHITE: white_syms, BLACK: black_syms}
    for r in (LEFTMOST, BETWEEN_RL, RIGHTMOST, BETWEEN_LR) + ((JUNCTION,) if junctions else ()):
        sup[r] = col_syms
    spec = LayerSpec("S", tuple(sorted(set(white_syms))), sup)
    c_sup = gen_component_C(bg, junctions).superposition
    uni = [(cls, c, s) for cls in CLASSES for c in c_sup.get(cls, ()) for s in sup.get(cls, ())]

    def parts(k):
        return s_parts(k[2])

    def horiz(a, b):
        aa, ag, ac = parts(a)
        ba, bg_, bc = parts(b)
        if aa == "r" and ac != bc:
            return False
        if a[0] in VERTICAL and b[0] == WHITE and bc != b[1][2:]:
            return False  # first column copies the background
        if a[0] in INTERIOR and b[0] in INTERIOR and aa == "d" and ba != "d":
            return False
        if a[0] == WHITE and ag and aa == "r":
            if b[0] == WHITE and not bg_:
                return False
            if b[0] in VERTICAL and b[0] != JUNCTION:
                return False
        if b[0] == LEFTMOST and a[0] in INTERIOR and not (a[0] == WHITE and ag and aa == "d"):
            return False
        if a[0] == WHITE and ag and aa == "d" and b[0] in VERTICAL and b[0] != LEFTMOST:
            return False
        return True

    def vert(a, b):
        aa, ag, _ = parts(a)
        ba, bg_, _ = parts(b)
        if a[0] in INTERIOR and b[0] in INTERIOR and aa != ba:
            return False
        # gray east arrows live only on the bottom interior row
        if b[0] == WHITE and bg_ and ba == "r" and a[0] != BLACK:
            return False
        # the lower-left white cell of a square is gray
        return True

    def ne(q, p):
        # q lower-left, p upper-right
        qa, qg, qc = parts(q)
        pa, pg, pc = parts(p)
        if qa == "d" and qc != pc:
            return False
        if p[0] == WHITE and pg and pa == "d" and q[0] == WHITE and not qg:
            return False
        if q[0] == WHITE and qg and qa == "d" and p[0] == WHITE and not (pg and pa == "d"):
            return False
        return True

    spec.rules.append(_forbid(H_PAIR, ("K", "C", "S"), uni, horiz))
    spec.rules.append(_forbid(V_PAIR, ("K", "C", "S"), uni, vert))
    spec.rules.append(_forbid(NE_PAIR, ("K", "C", "S"), uni, ne))

    # lower-left white of a square (column to the west, black below) is gray
    ks = [(cls, s) for cls in CLASSES for s in sup.get(cls, ())]

    def corner(below, col, cell):
        # sorted shape: (0,1) column, (1,0) below, (1,1) cell
        return not (col[0] in VERTICAL and below[0] == BLACK and cell[0] == WHITE
                    and not s_parts(cell[1])[1])

    rule = _forbid(((0, 1), (1, 0), (1, 1)), ("K", "S"), ks, lambda c, b, x: corner(b, c, x))
    spec.rules.append(rule)
    spec.notes = "diagonal region is D columns wide so copies land on the same relative row"
    return spec


# ----- P and T_M


def p_rows(size: int, offset: int) -> dict:
    """Reference computation done by the P rows of a square.

    Counts size and offset in binary with the increment transducer, strips
    their common trailing zeros and lays out the machine input.
    """
    if size < 1 or offset < 1:
        raise ValueError("size and offset must be positive")
    width = max(size, offset).bit_length()
    bp = increment_iterate(width, size)
    bq = increment_iterate(width, offset)
    p2, q2 = reduce_binary_pair(size, offset)
    return {"binary": (bp.lstrip("0"), bq.lstrip("0")), "reduced": (p2, q2), "input": encode_pair(p2, q2)}


def square_interior_fill(machine: TuringMachine, interior: int, word=(), budget: int = DEFAULT_SEARCH_BUDGET):
    """Machine rectangle filling an interior x interior square, or None."""
    if interior < 2:
        return None
    try:
        inst = RectangleInstance(interior, interior, tuple(word), machine.blank)
    except TilingError:
        return None
    return rectangle_tileable(compile_tm(machine), inst, budget)


def gen_component_P_TM(machine: TuringMachine) -> LayerSpec:
    """Machine tiles on square interiors.

    Edges between two whites must match; an edge facing the square's frame
    (black row or column) must be a border edge. The input row is left free
    at tile level; `p_rows` gives the input the arithmetic rows produce.
    """
    tiles = compile_tm(machine)
    by_name = {t.name: t for t in tiles}
    names = tuple(t.name for t in tiles)
    sup = {WHITE: names}
    for r in (BLACK,) + tuple(VERTICAL):
        sup[r] = ("-",)
    spec = LayerSpec("P_TM", names + ("-",), sup)
    uni = [(cls, s) for cls in CLASSES for s in sup.get(cls, ())]

    def horiz(a, b):
        if a[0] == WHITE and b[0] == WHITE:
            return by_name[a[1]].east == by_name[b[1]].west
        if a[0] == WHITE:
            return by_name[a[1]].east == BORDER
        if b[0] == WHITE:
            return by_name[b[1]].west == BORDER
        return True

    def vert(a, b):
        if a[0] == WHITE and b[0] == WHITE:
            return by_name[a[1]].north == by_name[b[1]].south
        if a[0] == WHITE:
            return by_name[a[1]].north == BORDER
        if b[0] == WHITE:
            return by_name[b[1]].south == BORDER
        return True

    spec.rules.append(_forbid(H_PAIR, ("K", "P_TM"), uni, horiz))
    spec.rules.append(_forbid(V_PAIR, ("K", "P_TM"), uni, vert))
    spec.notes = f"machine {machine.name or '?'}: {len(tiles)} tiles"
    return spec


# ----- A


def gen_component_A() -> LayerSpec:
    colors = ("yellow", "blue")
    sup = {WHITE: colors, BETWEEN_RL: colors}
    for r in (BLACK, LEFTMOST, RIGHTMOST, BETWEEN_LR, JUNCTION):
        sup[r] = ("-",)
    spec = LayerSpec("A", colors + ("-",), sup)
    syms = [(s,) for s in spec.alphabet]
    same = lambda a, b: a[0] == "-" or b[0] == "-" or a[0] == b[0]
    spec.rules.append(_forbid(H_PAIR, ("A",), syms, same))
    spec.rules.append(_forbid(V_PAIR, ("A",), syms, same))
    return spec


# ----- assembly


def layer_specs(machine: TuringMachine | None, bg: Background, layers: Sequence[str] = LAYER_ORDER,
                junctions: bool = False) -> list[LayerSpec]:
    gens = {
        "C": lambda: gen_component_C(bg, junctions),
        "R": lambda: gen_component_R(junctions),
        "W": lambda: gen_component_W(junctions),
        "S": lambda: gen_component_S(bg, junctions),
        "P_TM": lambda: gen_component_P_TM(machine),
        "A": gen_component_A,
    }
    unknown = set(layers) - set(gens)
    if unknown:
        raise ConstructionError(f"unknown layers {sorted(unknown)}")
    if "C" not in layers:
        raise ConstructionError("layer C is required")
    if "P_TM" in layers and machine is None:
        raise ConstructionError("layer P_TM needs a machine")
    return [gens[name]() for name in LAYER_ORDER if name in layers]


def product_tile_count(specs: Sequence[LayerSpec]) -> int:
    """Sum over classes of the product of each layer's allowed symbol counts."""
    total = 0
    c = specs[0]
    for cls in CLASSES:
        if cls not in c.superposition:
            continue
        n = 1
        for spec in specs:
            n *= len(spec.superposition.get(cls, ()))
        total += n
    return total


def assemble_tau(machine: TuringMachine | None, bg: Background, layers: Sequence[str] = LAYER_ORDER,
                 junctions: bool = False, max_tiles: int = 50_000) -> TilingSystem:
    """Product system over the chosen layers, restricted by superposition."""
    specs = layer_specs(machine, bg, layers, junctions)
    count = product_tile_count(specs)
    if count > max_tiles:
        raise AlphabetTooLarge(count, max_tiles)
    names = ["K"] + [s.name for s in specs]
    tiles = []
    for cls in CLASSES:
        if cls not in specs[0].superposition:
            continue
        for combo in product(*(s.superposition[cls] for s in specs)):
            tiles.append(Tile(len(tiles), "|".join(combo), (cls,) + combo))
    idx = {n: i for i, n in enumerate(names)}
    rules = []
    for spec in specs:
        for lr in spec.rules:
            if not lr.forbidden:
                continue
            missing = [l for l in lr.layers if l not in idx]
            if missing:
                raise ConstructionError(f"rule of layer {spec.name} needs layers {missing}")
            rules.append(Rule(lr.shape, lr.forbidden, tuple(idx[l] for l in lr.layers)))
    label = "+".join(s.name for s in specs)
    sys_ = TilingSystem(tiles, rules=rules, layer_names=names, name=f"tau[{label}]")
    sys_.meta = {
        "layers": [s.name for s in specs],
        "tiles": len(tiles),
        "rules": sys_.rule_count(),
        "per_layer_rules": {s.name: s.rule_count for s in specs},
        "machine": machine_digest(machine) if machine else "",
        "background": bg.name,
        "junctions": junctions,
    }
    return sys_


def machine_digest(machine: TuringMachine) -> str:
    rows = sorted(f"{s} {a} -> {t} {b} {m}" for (s, a), (t, b, m) in machine.transitions.items())
    text = "\n".join([machine.initial, ",".join(sorted(machine.halting))] + rows)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def class_of(system: TilingSystem, tid: int) -> str:
    return system.tiles[tid].layers[0]


def layer_symbol(system: TilingSystem, tid: int, layer: str) -> str:
    return system.tiles[tid].layers[system.layer_names.index(layer)]


# ----- skeleton layouts and band searches


def skeleton_classes(spacing: int, offsets: Sequence[int], height: int, base: int = 0,
                     strips: int | None = None) -> dict[Cell, str]:
    """Class of every cell for columns every `spacing` cells.

    offsets[i] is the shift from strip i to strip i+1. Strip 0's black rows
    sit at base + k * spacing. The band spans strips+1 column lines.
    """
    strips = len(offsets) + 1 if strips is None else strips
    rows = [base]
    for o in offsets:
        rows.append(rows[-1] + o)
    while len(rows) < strips + 2:
        rows.append(rows[-1] + (offsets[-1] if offsets else 0))
    rows = [base - (offsets[0] if offsets else 0)] + rows   # imaginary strip -1
    out = {}
    n = spacing

    def own(s, y):
        return (y - rows[s + 1]) % n == 0

    for y in range(height):
        for s in range(strips):
            for x in range(s * n + 1, (s + 1) * n):
                out[(x, y)] = BLACK if own(s, y) else WHITE
        for c in range(strips + 1):
            left_end = own(c - 1, y)     # row of the strip to the left ends here
            right_start = own(c, y)      # row of the strip to the right starts here
            if left_end and right_start:
                role = JUNCTION
            elif right_start:
                role = LEFTMOST
            elif left_end:
                role = RIGHTMOST
            else:
                # phase: which came last going down
                # which row met this column last going down; a junction counts as an end
                k = 1
                while True:
                    if own(c - 1, y - k):
                        role = BETWEEN_LR
                        break
                    if own(c, y - k):
                        role = BETWEEN_RL
                        break
                    k += 1
            out[(c * n, y)] = role
    return out


def domains_for(system: TilingSystem, classes: dict[Cell, str | Iterable[str]]) -> dict[Cell, list[int]]:
    by_class: dict[str, list[int]] = {}
    for t in system.tiles:
        by_class.setdefault(t.layers[0], []).append(t.id)
    out = {}
    for c, cl in classes.items():
        allowed = {cl} if isinstance(cl, str) else set(cl)
        out[c] = [t for k in sorted(allowed) for t in by_class.get(k, [])]
        out[c].sort()
    return out


def black_rows(system: TilingSystem, fill: Pattern, x0: int, x1: int) -> list[int]:
    """Rows whose cells strictly between columns x0 and x1 are all black."""
    d = fill.as_dict()
    _, y0, _, y1 = fill.bbox()
    return [y for y in range(y0, y1 + 1)
            if all(class_of(system, d[(x, y)]) == BLACK for x in range(x0 + 1, x1))]


def square_band_fills(spacing: int, height: int, bg: Background | None = None,
                      budget: int = DEFAULT_SEARCH_BUDGET,
                      system: TilingSystem | None = None) -> tuple[TilingSystem, list[Pattern]]:
    """All C x R fills of one strip between column lines at x=0 and x=spacing."""
    if system is None:
        system = assemble_tau(None, bg or placeholder_background(), ("C", "R"))
    classes = {}
    for y in range(height):
        classes[(0, y)] = VERTICAL
        classes[(spacing, y)] = VERTICAL
        for x in range(1, spacing):
            classes[(x, y)] = INTERIOR
    fills = list(GridSearch(system, spacing + 1, height, domains_for(system, classes), budget).solutions(None))
    return system, fills


def pinned_rows_fill(spacing: int, height: int, rows: Sequence[int], bg: Background | None = None,
                     budget: int = DEFAULT_SEARCH_BUDGET, system: TilingSystem | None = None) -> Pattern | None:
    """A C x R strip fill whose black rows are exactly `rows`, if any."""
    if system is None:
        system = assemble_tau(None, bg or placeholder_background(), ("C", "R"))
    classes = {}
    for y in range(height):
        classes[(0, y)] = VERTICAL
        classes[(spacing, y)] = VERTICAL
        for x in range(1, spacing):
            classes[(x, y)] = BLACK if y in rows else WHITE
    return solve_grid(system, spacing + 1, height, domains_for(system, classes), budget)


def offset_band_fill(spacing: int, offsets: Sequence[int], height: int, layers=("C", "R", "W"),
                     bg: Background | None = None, budget: int = DEFAULT_SEARCH_BUDGET,
                     system: TilingSystem | None = None) -> Pattern | None:
    """Fill of len(offsets)+1 strips with the given neighbour offsets, or None.

    Inner column lines and strip interiors are pinned to the skeleton; the
    two outer column lines only pin the rows of the strips inside the band.
    """
    bg = bg or placeholder_background()
    if system is None:
        system = assemble_tau(None, bg, layers, junctions=True)
    strips = len(offsets) + 1
    classes: dict[Cell, object] = dict(skeleton_classes(spacing, offsets, height, base=0, strips=strips))
    width = strips * spacing + 1
    for y in range(height):
        left = classes[(0, y)]
        classes[(0, y)] = {LEFTMOST, JUNCTION} if left in (LEFTMOST, JUNCTION) else VERTICAL - {LEFTMOST, JUNCTION}
        right = classes[(width - 1, y)]
        classes[(width - 1, y)] = ({RIGHTMOST, JUNCTION} if right in (RIGHTMOST, JUNCTION)
                                   else VERTICAL - {RIGHTMOST, JUNCTION})
    return solve_grid(system, width, height, domains_for(system, classes), budget)


def skeleton_patch(system: TilingSystem, spacing: int, offset: int, width: int, height: int,
                   base: int = 0, budget: int = DEFAULT_SEARCH_BUDGET, colors: dict | None = None) -> Pattern | None:
    """A valid window of the skeleton with constant offset, found by search."""
    strips = -(-width // spacing) + 1
    classes = skeleton_classes(spacing, [offset] * strips, height, base, strips)
    classes = {c: k for c, k in classes.items() if c[0] < width}
    doms = domains_for(system, classes)
    if colors:
        a = system.layer_names.index("A")
        for c, col in colors.items():
            doms[c] = [t for t in doms[c] if system.tiles[t].layers[a] == col]
    return solve_grid(system, width, height, doms, budget)


def skeleton_band(system: TilingSystem, spacing: int, offset: int, height: int,
                  budget: int = DEFAULT_SEARCH_BUDGET) -> PeriodicConfig | None:
    """One strip of the skeleton as a band repeated along (spacing, offset).

    The search window includes the next column line and a margin of one
    square above and below, so the cropped strip agrees with its own shifted
    copies; the band is cut from the middle.
    """
    patch = skeleton_patch(system, spacing, offset, spacing + 1, height + 2 * spacing, budget=budget)
    if patch is None:
        return None
    cells = {(x, y - spacing): t for (x, y), t in patch.as_dict().items()
             if x < spacing and spacing <= y < spacing + height}
    return PeriodicConfig(PeriodVector(spacing, offset), Pattern.from_dict(cells))


def compose_patch(system: TilingSystem, parts: Sequence[tuple[TilingSystem, Pattern]],
                  extra: dict[Cell, dict[str, str]] | None = None) -> Pattern:
    """Product patch from fills of smaller layer products over the same cells.

    Layers shared between parts must agree; `extra` supplies symbols for
    layers no part covers. Raises ConstructionError when a cell's symbols
    name no product tile.
    """
    names = system.layer_names
    index = {t.layers: t.id for t in system.tiles}
    cells: dict[Cell, dict[str, str]] = {}
    for sub, pat in parts:
        for c, tid in pat.cells:
            slot = cells.setdefault(c, {})
            for lname, sym in zip(sub.layer_names, sub.tiles[tid].layers):
                if slot.setdefault(lname, sym) != sym:
                    raise ConstructionError(f"layer {lname} disagrees at {c}")
    for c, syms in (extra or {}).items():
        cells.setdefault(c, {}).update(syms)
    out = {}
    for c, slot in cells.items():
        key = tuple(slot.get(n) for n in names)
        if key not in index:
            raise ConstructionError(f"no product tile for {key} at {c}")
        out[c] = index[key]
    return Pattern.from_dict(out)


def layered_skeleton_patch(machine: TuringMachine, bg: Background, spacing: int, offset: int,
                           width: int, height: int, budget: int = DEFAULT_SEARCH_BUDGET) -> Pattern | None:
    """Valid window of the full product, built layer group by layer group.

    C, R, W, A and C, S are solved separately on the same skeleton; every
    square gets the first machine rectangle filling its interior.
    """
    full = assemble_tau(machine, bg)
    crwa = assemble_tau(machine, bg, ("C", "R", "W", "A"))
    cs = assemble_tau(machine, bg, ("C", "S"))
    first = skeleton_patch(crwa, spacing, offset, width, height, budget=budget)
    second = skeleton_patch(cs, spacing, offset, width, height, budget=budget)
    inner = square_interior_fill(machine, spacing - 1, budget=budget)
    if first is None or second is None or inner is None:
        return None
    tiles = compile_tm(machine)
    fill = inner.as_dict()
    extra = {}
    for (x, y), tid in first.cells:
        if class_of(crwa, tid) != WHITE:
            extra[(x, y)] = {"P_TM": "-"}
            continue
        strip = (x - 1) // spacing
        x0 = strip * spacing + 1
        y0 = y - ((y - strip * offset - 1) % spacing)
        extra[(x, y)] = {"P_TM": tiles[fill[(x - x0, y - y0)]].name}
    return compose_patch(full, [(crwa, first), (cs, second)], extra)


# ----- skeleton report


@dataclass
class SkeletonReport:
    squares: list[tuple[Cell, int]]
    offsets: list[int]
    colors: dict[Cell, str]
    violations: list[str]
    inconclusive: bool = False


def check_skeleton(patch: Pattern, system: TilingSystem) -> SkeletonReport:
    """Read squares off a product patch and check their regularity."""
    d = patch.as_dict()
    x0, y0, x1, y1 = patch.bbox()
    cls = {c: class_of(system, t) for c, t in d.items()}
    cols = [x for x in range(x0, x1 + 1) if all(cls.get((x, y)) in VERTICAL for y in range(y0, y1 + 1))]
    report = SkeletonReport([], [], {}, [])
    if len(cols) < 2:
        report.inconclusive = True
        return report
    a_idx = system.layer_names.index("A") if "A" in system.layer_names else None
    strip_rows = []
    for xa, xb in zip(cols, cols[1:]):
        n = xb - xa
        rows = [y for y in range(y0, y1 + 1)
                if xb - xa > 1 and all(cls.get((x, y)) == BLACK for x in range(xa + 1, xb))]
        strip_rows.append((xa, n, rows))
        for r0, r1 in zip(rows, rows[1:]):
            if r1 - r0 != n:
                report.violations.append(f"strip at x={xa}: black rows {r0},{r1} are {r1 - r0} apart, columns {n}")
            report.squares.append(((xa, r0), n))
            if a_idx is not None:
                seen = {system.tiles[d[(x, y)]].layers[a_idx]
                        for x in range(xa + 1, xb) for y in range(r0 + 1, r1)}
                if len(seen) > 1:
                    report.violations.append(f"square at {(xa, r0)} has colors {sorted(seen)}")
                elif seen:
                    report.colors[(xa, r0)] = seen.pop()
    sizes = {n for _, n, _ in strip_rows}
    if len(sizes) > 1:
        report.violations.append(f"unequal column spacings {sorted(sizes)}")
    for (xa, na, ra), (xb, nb, rb) in zip(strip_rows, strip_rows[1:]):
        if ra and rb:
            report.offsets.append((rb[0] - ra[0]) % na)
    if len(set(report.offsets)) > 1:
        report.violations.append(f"unequal offsets {report.offsets}")
    if not report.squares:
        report.inconclusive = True
    # color propagation to the upper-right square when a betweenrl run links them
    if a_idx is not None and report.offsets and len(set(report.offsets)) == 1:
        off = report.offsets[0]
        for (xa, r0), n in report.squares:
            nb = report.colors.get((xa + n, r0 + off))
            here = report.colors.get((xa, r0))
            linked = any(cls.get((xa + n, y)) == BETWEEN_RL for y in range(r0 + off + 1, r0 + n))
            if linked and nb is not None and here is not None and nb != here:
                report.violations.append(f"squares {(xa, r0)} and {(xa + n, r0 + off)} differ in color")
    return report


# ----- quadrants and special slopes


@dataclass(frozen=True)
class SpecialCase:
    slope: Slope
    description: str


SPECIAL_CASES = {
    "0": "squares facing one another in rows; S copies horizontally, A syncs left to right neighbours",
    "1": "squares facing one another along the diagonal; A syncs from the top right corner",
    "-1": "mirror image of slope 1",
    "inf": "squares stacked in columns; S copies vertically, A syncs vertical neighbours",
}


def special_case(slope: Slope) -> SpecialCase:
    """Documented stand-in for slopes 0, 1, -1 and infinity; no rules are generated."""
    key = slope.fraction() if not slope.infinite else "inf"
    key = {"0/1": "0", "1/1": "1", "-1/1": "-1"}.get(key, key)
    if key not in SPECIAL_CASES:
        raise ConstructionError(f"slope {slope} is not a special case")
    return SpecialCase(slope, SPECIAL_CASES[key])


def orient_for_slope(system: TilingSystem, slope: Slope) -> TilingSystem:
    """Move a system built for slopes in (0, 1) to the quadrant of `slope`.

    Slopes above 1 use the transpose; negative slopes add a mirror image.
    """
    if slope.infinite or slope.numerator == 0 or abs(slope.numerator) == slope.denominator:
        raise ConstructionError("use special_case for slopes 0, 1, -1 and infinity")
    out = system
    if abs(slope.numerator) > slope.denominator:
        out = out.transpose()
    if slope.numerator < 0:
        out = out.reflect()
    return out
