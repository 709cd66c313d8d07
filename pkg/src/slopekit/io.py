"""Text formats: tilesets, Turing machines, witnesses and patches.

Tileset (`slopekit-tileset v1`)::

    name YB
    tiles Y B
    forbid (0,0)=Y; (1,0)=B

or Wang tiles with integer edge colors::

    wang NAME N E S W

Product systems list their layers and tiles, then rules over some layers::

    layers K C R
    tile NAME sym sym sym
    rule layers=K,C shape=(0,0),(1,0)
    ban white/w%3Ag0 black/black

Symbols are percent-encoded so they never contain spaces or slashes.
Lines starting with '#' are comments.
"""

from __future__ import annotations

import json
import re
from collections import defaultdict
from pathlib import Path
from urllib.parse import quote, unquote

from .core import Pattern, PeriodVector, Rule, Tile, TilingError, TilingSystem, WangTile, wang_to_patterns
from .machine import MOVES, MachineError, TuringMachine
from .periodicity import Kind, PeriodicWitness, Strip

TILESET_HEADER = "slopekit-tileset v1"
TM_HEADER = "slopekit-tm v1"
PATCH_HEADER = "slopekit-patch v1"
WITNESS_HEADER = "slopekit-witness v1"

_CELL = re.compile(r"^\((-?\d+),(-?\d+)\)=(\S+)$")
_OFFSET = re.compile(r"\((-?\d+),(-?\d+)\)")


class ParseError(TilingError):
    def __init__(self, line: int, message: str, source: str = ""):
        self.line = line
        self.message = message
        where = f"{source}:" if source else ""
        super().__init__(f"{where}line {line}: {message}")


def _lines(text: str):
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield n, line


def _header(lines: list, want: str, source: str):
    if not lines:
        raise ParseError(1, f"empty file, expected header {want!r}", source)
    n, first = lines[0]
    if first != want:
        raise ParseError(n, f"expected header {want!r}, got {first!r}", source)
    return lines[1:]


def _enc(sym: str) -> str:
    return quote(sym, safe="!$&'()*+,-.:;=@[]^_`{|}~<>?")


def _shape(text: str, n: int, source: str) -> tuple:
    cells = [(int(a), int(b)) for a, b in _OFFSET.findall(text)]
    if not cells or _OFFSET.sub("", text).replace(",", ""):
        raise ParseError(n, f"bad shape {text!r}", source)
    return tuple(cells)


# ----- tilesets


def parse_tileset(text: str, source: str = "") -> TilingSystem:
    lines = _header(list(_lines(text)), TILESET_HEADER, source)
    name = ""
    names: list[str] = []
    name_line: dict[str, int] = {}
    layer_names: list[str] | None = None
    layered: list[tuple[str, ...]] = []
    wang: list[WangTile] = []
    forbids: list[tuple[int, list[tuple[tuple[int, int], str]]]] = []
    rules: list[tuple[int, tuple, tuple, list]] = []

    def add_name(tname: str, n: int):
        if tname in name_line:
            raise ParseError(n, f"duplicate tile name {tname!r} (first on line {name_line[tname]})", source)
        name_line[tname] = n
        names.append(tname)

    for n, line in lines:
        word, _, rest = line.partition(" ")
        rest = rest.strip()
        if word == "name":
            name = rest
        elif word == "tiles":
            if not rest:
                raise ParseError(n, "empty tile list", source)
            for t in rest.split():
                add_name(t, n)
        elif word == "layers":
            if layer_names is not None:
                raise ParseError(n, "layers declared twice", source)
            layer_names = rest.split()
            if not layer_names:
                raise ParseError(n, "empty layer list", source)
        elif word == "tile":
            if layer_names is None:
                raise ParseError(n, "tile line before layers", source)
            parts = rest.split()
            if len(parts) != len(layer_names) + 1:
                raise ParseError(n, f"tile needs a name and {len(layer_names)} symbols", source)
            add_name(parts[0], n)
            layered.append(tuple(unquote(s) for s in parts[1:]))
        elif word == "wang":
            parts = rest.split()
            if len(parts) != 5:
                raise ParseError(n, "wang needs NAME N E S W", source)
            try:
                colors = [int(c) for c in parts[1:]]
            except ValueError:
                raise ParseError(n, "wang colors must be integers", source) from None
            add_name(parts[0], n)
            wang.append(WangTile(parts[0], *colors))
        elif word == "forbid":
            cells = []
            for item in rest.split(";"):
                item = item.strip().replace(" ", "")
                if not item:
                    continue
                m = _CELL.match(item)
                if not m:
                    raise ParseError(n, f"bad cell {item!r}, expected (dx,dy)=NAME", source)
                cells.append(((int(m[1]), int(m[2])), m[3]))
            if not cells:
                raise ParseError(n, "empty forbidden pattern", source)
            if len({c for c, _ in cells}) != len(cells):
                raise ParseError(n, "cell listed twice in one pattern", source)
            forbids.append((n, cells))
        elif word == "rule":
            fields = dict(f.split("=", 1) for f in rest.split() if "=" in f)
            if set(fields) != {"layers", "shape"}:
                raise ParseError(n, "rule needs layers=... shape=...", source)
            rules.append((n, tuple(fields["layers"].split(",")), _shape(fields["shape"], n, source), []))
        elif word == "ban":
            if not rules:
                raise ParseError(n, "ban line outside a rule", source)
            rn, lnames, shape, bans = rules[-1]
            cells = rest.split()
            if len(cells) != len(shape):
                raise ParseError(n, f"ban needs {len(shape)} cells", source)
            key = tuple(tuple(unquote(s) for s in c.split("/")) for c in cells)
            if any(len(k) != len(lnames) for k in key):
                raise ParseError(n, f"each cell needs {len(lnames)} symbols", source)
            bans.append(key)
        else:
            raise ParseError(n, f"unknown directive {word!r}", source)

    kinds = [bool(wang), bool(layered), bool(names) and not wang and not layered]
    if sum(kinds) == 0:
        raise ParseError(lines[-1][0] if lines else 1, "no tiles declared", source)
    if wang and (layered or len(names) != len(wang)):
        raise ParseError(lines[0][0], "wang tiles cannot be mixed with other tile lists", source)
    if wang:
        if forbids or rules:
            raise ParseError(forbids[0][0] if forbids else rules[0][0],
                             "wang tilesets take no forbid or rule lines", source)
        return wang_to_patterns(wang, name=name)

    index = {t: i for i, t in enumerate(names)}
    if layered:
        if len(layered) != len(names):
            raise ParseError(lines[0][0], "layered tilesets declare every tile with a tile line", source)
        tiles = [Tile(i, t, layered[i]) for i, t in enumerate(names)]
    else:
        tiles = [Tile(i, t) for i, t in enumerate(names)]
    patterns = []
    for n, cells in forbids:
        d = {}
        for c, t in cells:
            if t not in index:
                raise ParseError(n, f"unknown tile {t!r}", source)
            d[c] = index[t]
        patterns.append(Pattern.from_dict(d))
    built_rules = []
    for n, lnames, shape, bans in rules:
        if layer_names is None:
            raise ParseError(n, "layered rule in a tileset without layers", source)
        try:
            idx = tuple(layer_names.index(x) for x in lnames)
        except ValueError:
            raise ParseError(n, f"unknown layer in {lnames}", source) from None
        x0 = min(x for x, _ in shape)
        y0 = min(y for _, y in shape)
        moved = [(x - x0, y - y0) for x, y in shape]
        if len(set(moved)) != len(moved):
            raise ParseError(n, "cell listed twice in one shape", source)
        key_order = sorted(range(len(moved)), key=lambda i: moved[i])
        shape_sorted = tuple(moved[i] for i in key_order)
        bans_sorted = frozenset(tuple(b[i] for i in key_order) for b in bans)
        built_rules.append(Rule(shape_sorted, bans_sorted, idx))
    return TilingSystem(tiles, forbidden=patterns, rules=built_rules,
                        layer_names=layer_names, name=name)


def load_tileset(path: str | Path) -> TilingSystem:
    p = Path(path)
    return parse_tileset(p.read_text(encoding="utf-8"), str(p))


def dump_tileset(system: TilingSystem, comments: list[str] | None = None) -> str:
    """Text form of any system; layered rules use rule/ban blocks."""
    out = [TILESET_HEADER]
    for c in comments or []:
        out.append(f"# {c}")
    if system.name:
        out.append(f"name {system.name}")
    layered = system.layer_names is not None
    if layered:
        out.append("layers " + " ".join(system.layer_names))
        for t in system.tiles:
            out.append("tile " + " ".join([t.name] + [_enc(s) for s in t.layers]))
    else:
        out.append("tiles " + " ".join(t.name for t in system.tiles))
    names = [t.name for t in system.tiles]
    for r in system.rules:
        if r.layers is None:
            for bad in sorted(r.forbidden):
                out.append("forbid " + "; ".join(f"({x},{y})={names[t]}" for (x, y), t in zip(r.shape, bad)))
        else:
            lnames = ",".join(system.layer_names[i] for i in r.layers)
            shape = ",".join(f"({x},{y})" for x, y in r.shape)
            out.append(f"rule layers={lnames} shape={shape}")
            for bad in sorted(r.forbidden):
                out.append("ban " + " ".join("/".join(_enc(s) for s in key) for key in bad))
    return "\n".join(out) + "\n"


def dump_wang(tiles: list[WangTile], name: str = "", comments: list[str] | None = None) -> str:
    """Wang section with edge labels numbered in order of first appearance."""
    colors: dict = {}

    def color(label) -> int:
        return colors.setdefault(label, len(colors))

    out = [TILESET_HEADER]
    for c in comments or []:
        out.append(f"# {c}")
    if name:
        out.append(f"name {name}")
    for t in tiles:
        out.append(f"wang {t.name} {color(t.north)} {color(t.east)} {color(t.south)} {color(t.west)}")
    return "\n".join(out) + "\n"


# ----- machines


def parse_tm(text: str, source: str = "") -> TuringMachine:
    """Directives: name, states, initial, halting, alphabet, blank, and
    transition lines `state letter -> state letter move`."""
    lines = _header(list(_lines(text)), TM_HEADER, source)
    fields: dict[str, list[str]] = {}
    seen_at: dict[str, int] = {}
    rows = []
    for n, line in lines:
        if "->" in line:
            lhs, _, rhs = line.partition("->")
            a, b = lhs.split(), rhs.split()
            if len(a) != 2 or len(b) != 3:
                raise ParseError(n, "transition must read `state letter -> state letter move`", source)
            if b[2] not in MOVES:
                raise ParseError(n, f"move must be one of {', '.join(MOVES)}", source)
            rows.append((n, (a[0], a[1], b[0], b[1], b[2])))
            continue
        word, _, rest = line.partition(" ")
        if word not in ("name", "states", "initial", "halting", "alphabet", "blank"):
            raise ParseError(n, f"unknown directive {word!r}", source)
        if word in fields:
            raise ParseError(n, f"{word} given twice (first on line {seen_at[word]})", source)
        fields[word] = rest.split()
        seen_at[word] = n
    for need in ("initial", "alphabet", "blank"):
        if need not in fields:
            raise ParseError(lines[-1][0] if lines else 1, f"missing {need}", source)
    alphabet = tuple(fields["alphabet"])
    if len(set(alphabet)) != len(alphabet):
        raise ParseError(seen_at["alphabet"], "duplicate letter", source)
    initial = fields["initial"][0] if fields["initial"] else ""
    halting = tuple(fields.get("halting", ()))
    states = list(fields.get("states", ()))
    if len(set(states)) != len(states):
        raise ParseError(seen_at["states"], "duplicate state", source)
    declared = bool(states)
    for s in [initial, *halting]:
        if s not in states:
            if declared:
                raise ParseError(seen_at.get("halting", seen_at["initial"]), f"unknown state {s!r}", source)
            states.append(s)
    trans = {}
    for n, (s, a, s2, a2, mv) in rows:
        for x in (s, s2):
            if x not in states:
                if declared:
                    raise ParseError(n, f"unknown state {x!r}", source)
                states.append(x)
        for x in (a, a2):
            if x not in alphabet:
                raise ParseError(n, f"unknown letter {x!r}", source)
        if (s, a) in trans:
            raise ParseError(n, f"second transition for ({s}, {a})", source)
        trans[(s, a)] = (s2, a2, mv)
    blank = fields["blank"][0] if fields["blank"] else ""
    name = " ".join(fields.get("name", ()))
    try:
        return TuringMachine(tuple(states), initial, frozenset(halting), alphabet, blank, trans, name)
    except MachineError as e:
        raise ParseError(lines[0][0], str(e), source) from None


def load_tm(path: str | Path) -> TuringMachine:
    p = Path(path)
    return parse_tm(p.read_text(encoding="utf-8"), str(p))


def dump_tm(machine: TuringMachine) -> str:
    out = [TM_HEADER]
    if machine.name:
        out.append(f"name {machine.name}")
    out.append("states " + " ".join(machine.states))
    out.append(f"initial {machine.initial}")
    out.append("halting " + " ".join(sorted(machine.halting)))
    out.append("alphabet " + " ".join(machine.alphabet))
    out.append(f"blank {machine.blank}")
    for (s, a), (s2, a2, mv) in sorted(machine.transitions.items()):
        out.append(f"{s} {a} -> {s2} {a2} {mv}")
    return "\n".join(out) + "\n"


# ----- patches


def dump_patch(system: TilingSystem, patch: Pattern) -> str:
    """Rows top first, tile names separated by spaces, '.' outside the support."""
    names = [t.name for t in system.tiles]
    x0, y0, x1, y1 = patch.bbox()
    d = patch.as_dict()
    out = [PATCH_HEADER, f"origin {x0} {y0}"]
    for y in range(y1, y0 - 1, -1):
        out.append(" ".join(names[d[(x, y)]] if (x, y) in d else "." for x in range(x0, x1 + 1)))
    return "\n".join(out) + "\n"


def parse_patch_grid(text: str, source: str = "") -> tuple[tuple[int, int], list[list[str | None]]]:
    """Origin and name grid (rows bottom first) without needing a tileset."""
    lines = _header(list(_lines(text)), PATCH_HEADER, source)
    origin = (0, 0)
    rows = []
    for n, line in lines:
        if line.startswith("origin "):
            try:
                ox, oy = (int(v) for v in line.split()[1:])
            except ValueError:
                raise ParseError(n, "origin needs two integers", source) from None
            origin = (ox, oy)
            continue
        rows.append((n, [None if t == "." else t for t in line.split()]))
    if not rows:
        raise ParseError(lines[-1][0] if lines else 1, "patch has no rows", source)
    width = len(rows[0][1])
    for n, r in rows:
        if len(r) != width:
            raise ParseError(n, f"row has {len(r)} cells, expected {width}", source)
    grid = [r for _, r in reversed(rows)]
    if all(c is None for r in grid for c in r):
        raise ParseError(rows[0][0], "patch is empty", source)
    return origin, grid


def parse_patch(system: TilingSystem, text: str, source: str = "") -> Pattern:
    (ox, oy), grid = parse_patch_grid(text, source)
    index = {t.name: t.id for t in system.tiles}
    d = {}
    for y, row in enumerate(grid):
        for x, name in enumerate(row):
            if name is None:
                continue
            if name not in index:
                raise ParseError(1, f"unknown tile {name!r}", source)
            d[(ox + x, oy + y)] = index[name]
    return Pattern.from_dict(d)


# ----- witnesses


def dump_witness(system: TilingSystem, witness: PeriodicWitness, patch: Pattern | None = None) -> str:
    """Vector, block height, node blocks as row-major name grids, and the walk.

    A realized window can be attached so the file renders on its own.
    """
    names = [t.name for t in system.tiles]
    blocks = {}
    for i in sorted(witness.blocks):
        b = witness.blocks[i].block
        d = b.as_dict()
        x0, y0, x1, y1 = b.bbox()
        blocks[str(i)] = [[names[d[(x, y)]] for x in range(x0, x1 + 1)] for y in range(y0, y1 + 1)]
    doc = {
        "format": WITNESS_HEADER,
        "system": system.name,
        "vector": [witness.vector.p, witness.vector.q],
        "kind": witness.kind.value,
        "k": witness.k,
        "height": witness.height,
        "cycle_a": list(witness.cycle_a),
        "connector": list(witness.connector),
        "cycle_b": list(witness.cycle_b),
        "blocks": blocks,
    }
    if patch is not None:
        x0, y0, x1, y1 = patch.bbox()
        d = patch.as_dict()
        doc["patch"] = {"origin": [x0, y0],
                        "rows": [[names[d[(x, y)]] if (x, y) in d else None for x in range(x0, x1 + 1)]
                                 for y in range(y0, y1 + 1)]}
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def parse_witness(system: TilingSystem, text: str, source: str = "") -> PeriodicWitness:
    doc = _witness_doc(text, source)
    index = {t.name: t.id for t in system.tiles}
    v = PeriodVector(*doc["vector"])
    blocks = {}
    try:
        for key, rows in doc["blocks"].items():
            d = {(x, y): index[n] for y, row in enumerate(rows) for x, n in enumerate(row)}
            blocks[int(key)] = Strip(v, Pattern.from_dict(d), int(key))
    except KeyError as e:
        raise ParseError(1, f"unknown tile {e.args[0]!r}", source) from None
    return PeriodicWitness(v, Kind(doc["kind"]), tuple(doc["cycle_a"]), tuple(doc["cycle_b"]),
                           tuple(doc["connector"]), doc["k"], doc["height"], blocks)


def _witness_doc(text: str, source: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.lineno, f"bad witness document: {e.msg}", source) from None
    if not isinstance(doc, dict) or doc.get("format") != WITNESS_HEADER:
        raise ParseError(1, f"expected format {WITNESS_HEADER!r}", source)
    return doc


def witness_patch_grid(text: str, source: str = "") -> tuple[tuple[int, int], list[list[str | None]]]:
    doc = _witness_doc(text, source)
    if "patch" not in doc:
        raise ParseError(1, "witness has no attached patch", source)
    return tuple(doc["patch"]["origin"]), doc["patch"]["rows"]


def grid_from_file(text: str, source: str = "") -> tuple[tuple[int, int], list[list[str | None]]]:
    """Name grid from either a patch file or a witness with an attached patch."""
    if text.lstrip().startswith("{"):
        return witness_patch_grid(text, source)
    return parse_patch_grid(text, source)


def tile_counts(grid: list[list[str | None]]) -> dict[str, int]:
    counts: dict[str, int] = defaultdict(int)
    for row in grid:
        for n in row:
            if n is not None:
                counts[n] += 1
    return dict(counts)
