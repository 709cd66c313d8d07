"""Tiles, patterns, tiling systems, period vectors and slopes.

A tiling system is an alphabet plus forbidden finite patterns. Forbidden
patterns are grouped by shape into `Rule` objects. A rule can also look at
only some layers of a product tile, which keeps product systems small.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, Mapping, Sequence

Cell = tuple[int, int]


class TilingError(ValueError):
    """Malformed input: unknown tiles, bad supports, parse failures."""


class DomainError(ValueError):
    pass


class UnsupportedShape(ValueError):
    pass


@dataclass(frozen=True)
class Tile:
    id: int
    name: str
    layers: tuple[str, ...] | None = None


@dataclass(frozen=True)
class Pattern:
    """Finite map from cells to tile ids, stored as a sorted tuple."""

    cells: tuple[tuple[Cell, int], ...]

    def __post_init__(self):
        if not self.cells:
            raise TilingError("pattern support must be nonempty")

    @classmethod
    def from_dict(cls, assignment: Mapping[Cell, int]) -> "Pattern":
        return cls(tuple(sorted(assignment.items())))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "Pattern":
        """Build from rows listed bottom to top."""
        return cls.from_dict({(x, y): t for y, row in enumerate(rows) for x, t in enumerate(row)})

    @property
    def support(self) -> frozenset[Cell]:
        return frozenset(c for c, _ in self.cells)

    def as_dict(self) -> dict[Cell, int]:
        return dict(self.cells)

    def bbox(self) -> tuple[int, int, int, int]:
        xs = [c[0] for c, _ in self.cells]
        ys = [c[1] for c, _ in self.cells]
        return min(xs), min(ys), max(xs), max(ys)

    @property
    def width(self) -> int:
        x0, _, x1, _ = self.bbox()
        return x1 - x0 + 1

    @property
    def height(self) -> int:
        _, y0, _, y1 = self.bbox()
        return y1 - y0 + 1

    def translate(self, dx: int, dy: int) -> "Pattern":
        return Pattern(tuple(((x + dx, y + dy), t) for (x, y), t in self.cells))

    def normalized(self) -> "Pattern":
        x0, y0, _, _ = self.bbox()
        return self.translate(-x0, -y0)

    def rows(self, fill: int = -1) -> list[list[int]]:
        """Dense rows bottom to top over the bounding box."""
        x0, y0, x1, y1 = self.bbox()
        d = self.as_dict()
        return [[d.get((x, y), fill) for x in range(x0, x1 + 1)] for y in range(y0, y1 + 1)]


def normalize_shape(cells: Iterable[Cell]) -> tuple[Cell, ...]:
    cells = list(cells)
    x0 = min(c[0] for c in cells)
    y0 = min(c[1] for c in cells)
    return tuple(sorted((x - x0, y - y0) for x, y in cells))


@dataclass(frozen=True)
class Rule:
    """Forbidden patterns sharing one shape.

    `forbidden` holds tuples of keys, one per shape cell in shape order. With
    `layers=None` a key is a tile id; otherwise it is the tuple of the tile's
    symbols on those layers.
    """

    shape: tuple[Cell, ...]
    forbidden: frozenset[tuple]
    layers: tuple[int, ...] | None = None

    @property
    def width(self) -> int:
        return max(c[0] for c in self.shape) + 1

    @property
    def height(self) -> int:
        return max(c[1] for c in self.shape) + 1


class TilingSystem:
    """Alphabet plus forbidden patterns. Immutable after construction."""

    def __init__(
        self,
        tiles: Sequence[Tile] | Sequence[str],
        forbidden: Iterable[Pattern] = (),
        rules: Iterable[Rule] = (),
        layer_names: Sequence[str] | None = None,
        name: str = "",
    ):
        tl = []
        for i, t in enumerate(tiles):
            t = t if isinstance(t, Tile) else Tile(i, t)
            if t.id != i:
                raise TilingError(f"tile {t.name!r} has id {t.id}, expected {i}")
            tl.append(t)
        self.tiles: tuple[Tile, ...] = tuple(tl)
        self.name = name
        self.meta: dict = {}
        self.layer_names = tuple(layer_names) if layer_names else None
        if len({t.name for t in tl}) != len(tl):
            raise TilingError("duplicate tile names")
        if self.layer_names:
            for t in tl:
                if t.layers is None or len(t.layers) != len(self.layer_names):
                    raise TilingError(f"tile {t.name!r} has wrong layer arity")
        self._index = {t.name: t.id for t in tl}
        self._keys: dict[tuple[int, ...] | None, tuple] = {}

        grouped: dict[tuple, set] = {}
        n = len(tl)
        for pat in forbidden:
            pat = pat.normalized()
            for _, tid in pat.cells:
                if not 0 <= tid < n:
                    raise TilingError(f"forbidden pattern uses unknown tile id {tid}")
            shape = tuple(c for c, _ in pat.cells)
            grouped.setdefault((shape, None), set()).add(tuple(t for _, t in pat.cells))
        for r in rules:
            shape = normalize_shape(r.shape)
            if shape != r.shape:
                raise TilingError("rule shape must be normalized and sorted")
            if r.layers is not None and not self.layer_names:
                raise TilingError("layered rule on a system without layers")
            grouped.setdefault((shape, r.layers), set()).update(r.forbidden)
        self.rules: tuple[Rule, ...] = tuple(
            Rule(shape, frozenset(bad), layers)
            for (shape, layers), bad in sorted(grouped.items(), key=lambda kv: (kv[0][0], kv[0][1] or ()))
            if bad
        )

    # ----- lookup helpers

    def __len__(self) -> int:
        return len(self.tiles)

    def __repr__(self) -> str:
        return f"TilingSystem({self.name or '?'}: {len(self.tiles)} tiles, {len(self.rules)} rules)"

    def tile_id(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise TilingError(f"unknown tile {name!r}") from None

    def names(self, ids: Iterable[int]) -> list[str]:
        return [self.tiles[i].name for i in ids]

    def keys(self, layers: tuple[int, ...] | None) -> tuple:
        """Per-tile keys used to match rules on the given layers."""
        k = self._keys.get(layers)
        if k is None:
            if layers is None:
                k = tuple(range(len(self.tiles)))
            else:
                k = tuple(tuple(t.layers[i] for i in layers) for t in self.tiles)
            self._keys[layers] = k
        return k

    def is_forbidden(self, rule: Rule, ids: Sequence[int]) -> bool:
        keys = self.keys(rule.layers)
        return tuple(keys[i] for i in ids) in rule.forbidden

    @property
    def diameter(self) -> tuple[int, int]:
        w = max((r.width for r in self.rules), default=1)
        h = max((r.height for r in self.rules), default=1)
        return w, h

    @property
    def k(self) -> int:
        """Strip height factor: one more than the largest forbidden extent."""
        return 1 + max(self.diameter)

    @property
    def forbidden(self) -> list[Pattern]:
        """All forbidden patterns over concrete tiles (layered rules expanded)."""
        out = []
        for r in self.rules:
            keys = self.keys(r.layers)
            by_key: dict = {}
            for i, kk in enumerate(keys):
                by_key.setdefault(kk, []).append(i)
            for bad in sorted(r.forbidden, key=repr):
                for ids in product(*(by_key.get(kk, []) for kk in bad)):
                    out.append(Pattern(tuple(zip(r.shape, ids))))
        return sorted(set(out), key=lambda p: p.cells)

    def rule_count(self) -> int:
        return sum(len(r.forbidden) for r in self.rules)

    # ----- transforms

    def transformed(self, f: Callable[[int, int], Cell], name: str | None = None) -> "TilingSystem":
        """Apply a lattice symmetry to every rule."""
        rules = []
        for r in self.rules:
            moved = [f(x, y) for x, y in r.shape]
            shape = normalize_shape(moved)
            x0 = min(c[0] for c in moved)
            y0 = min(c[1] for c in moved)
            order = [shape.index((x - x0, y - y0)) for x, y in moved]
            inv = [0] * len(order)
            for src, dst in enumerate(order):
                inv[dst] = src
            bad = frozenset(tuple(b[inv[j]] for j in range(len(b))) for b in r.forbidden)
            rules.append(Rule(shape, bad, r.layers))
        return TilingSystem(self.tiles, rules=rules, layer_names=self.layer_names,
                            name=name if name is not None else self.name)

    def transpose(self) -> "TilingSystem":
        return self.transformed(lambda x, y: (y, x), self.name + "^T" if self.name else "")

    def rotate(self, quarter_turns: int = 1) -> "TilingSystem":
        f = {0: lambda x, y: (x, y), 1: lambda x, y: (-y, x),
             2: lambda x, y: (-x, -y), 3: lambda x, y: (y, -x)}[quarter_turns % 4]
        return self.transformed(f, f"{self.name}@rot{quarter_turns % 4}")

    def reflect(self) -> "TilingSystem":
        """Mirror left-right."""
        return self.transformed(lambda x, y: (-x, y), f"{self.name}@mirror")


@dataclass(frozen=True)
class PeriodVector:
    p: int
    q: int

    def __post_init__(self):
        if self.p == 0 and self.q == 0:
            raise DomainError("period vector must be nonzero")

    def __str__(self):
        return f"({self.p},{self.q})"

    def scaled(self, m: int) -> "PeriodVector":
        return PeriodVector(self.p * m, self.q * m)


@dataclass(frozen=True)
class Slope:
    numerator: int
    denominator: int
    infinite: bool = False

    def __post_init__(self):
        if self.infinite:
            if (self.numerator, self.denominator) != (1, 0):
                raise DomainError("infinite slope is stored as 1/0")
        elif self.denominator <= 0 or math.gcd(self.numerator, self.denominator) != 1:
            raise DomainError(f"slope {self.numerator}/{self.denominator} is not canonical")

    @classmethod
    def of(cls, num: int, den: int) -> "Slope":
        if den == 0:
            if num == 0:
                raise DomainError("0/0 is not a slope")
            return INFINITY
        f = Fraction(num, den)
        return cls(f.numerator, f.denominator)

    @classmethod
    def parse(cls, text: str) -> "Slope":
        text = text.strip()
        if text in ("inf", "∞"):
            return INFINITY
        num, _, den = text.partition("/")
        return cls.of(int(num), int(den or 1))

    def direction(self) -> PeriodVector:
        """Smallest integer vector with this slope, with p >= 0."""
        if self.infinite:
            return PeriodVector(0, 1)
        return PeriodVector(self.denominator, self.numerator)

    def fraction(self) -> str:
        """Always written q/p; infinity is "inf"."""
        return "inf" if self.infinite else f"{self.numerator}/{self.denominator}"

    def __str__(self):
        if self.infinite:
            return "inf"
        if self.denominator == 1:
            return str(self.numerator)
        return f"{self.numerator}/{self.denominator}"


INFINITY = Slope(1, 0, True)


def slope_of(v: PeriodVector | tuple[int, int]) -> Slope:
    p, q = (v.p, v.q) if isinstance(v, PeriodVector) else v
    if p == 0 and q == 0:
        raise DomainError("zero vector has no direction")
    return Slope.of(q, p)


# ----- finite patches


@dataclass(frozen=True)
class Violation:
    offset: Cell
    pattern: Pattern


def _check_ids(system: TilingSystem, ids: Iterable[int]):
    n = len(system)
    for t in ids:
        if not isinstance(t, int) or not 0 <= t < n:
            raise TilingError(f"unknown tile id {t!r}")


def validate_patch(system: TilingSystem, patch: Pattern | Mapping[Cell, int]) -> list[Violation]:
    """Every fully contained occurrence of a forbidden pattern."""
    cells = patch.as_dict() if isinstance(patch, Pattern) else dict(patch)
    _check_ids(system, cells.values())
    out = []
    for r in system.rules:
        keys = system.keys(r.layers)
        s0 = r.shape[0]
        for (cx, cy) in cells:
            ox, oy = cx - s0[0], cy - s0[1]
            ids = []
            for dx, dy in r.shape:
                t = cells.get((ox + dx, oy + dy))
                if t is None:
                    break
                ids.append(t)
            else:
                if tuple(keys[t] for t in ids) in r.forbidden:
                    out.append(Violation((ox, oy), Pattern(tuple(zip(r.shape, ids)))))
    out.sort(key=lambda v: (v.offset, v.pattern.cells))
    return out


# ----- periodic configurations


@dataclass(frozen=True)
class PeriodicConfig:
    """A band repeated along one period vector (the skewed extension).

    For p != 0 the band has width |p| and cell (x, y) is read from
    band(x mod |p|, y - floor(x/|p|) * q'), with (|p|, q') the vector
    oriented to point right. For p = 0 the band is horizontal, of height
    |q|, and reduction acts on y.
    """

    period: PeriodVector
    fundamental: Pattern

    def __post_init__(self):
        x0, y0, x1, y1 = self.fundamental.bbox()
        w, h = x1 - x0 + 1, y1 - y0 + 1
        if (x0, y0) != (0, 0) or len(self.fundamental.cells) != w * h:
            raise TilingError("fundamental band must be a full rectangle anchored at the origin")
        p, q = self.period.p, self.period.q
        if p != 0 and w != abs(p):
            raise TilingError(f"band width {w} does not match |p|={abs(p)}")
        if p == 0 and h != abs(q):
            raise TilingError(f"band height {h} does not match |q|={abs(q)}")

    @property
    def size(self) -> tuple[int, int]:
        return self.fundamental.width, self.fundamental.height

    def lookup(self, x: int, y: int) -> int | None:
        p, q = self.period.p, self.period.q
        band = self.fundamental.as_dict()
        if p == 0:
            q = abs(q)
            return band.get((x, y % q))
        if p < 0:
            p, q = -p, -q
        return band.get((x % p, y - (x // p) * q))


def skew_offsets(shape: Sequence[Cell], p: int, q: int) -> list[list[Cell]]:
    """For each anchor column x0 in [0, p): band coordinates of the shape cells.

    Entry (i, dy) means column i of the band, row y0 + dy, for anchor (x0, y0).
    """
    return [[((x0 + dx) % p, dy - ((x0 + dx) // p) * q) for dx, dy in shape] for x0 in range(p)]


def band_occurrences(shape: Sequence[Cell], p: int, q: int, height: int):
    """Yield band-cell tuples of every occurrence lying inside a band of given height."""
    for offs in skew_offsets(shape, p, q):
        lo = min(d for _, d in offs)
        hi = max(d for _, d in offs)
        for y0 in range(-lo, height - hi):
            yield tuple((i, y0 + d) for i, d in offs)


def validate_periodic(system: TilingSystem, config: PeriodicConfig) -> bool:
    """True iff the skewed extension of the band contains no forbidden pattern."""
    band = config.fundamental.as_dict()
    _check_ids(system, band.values())
    p, q = config.period.p, config.period.q
    if p == 0:
        system = system.transpose()
        band = {(y, x): t for (x, y), t in band.items()}
        p, q = abs(q), 0
    elif p < 0:
        p, q = -p, -q
    height = max(y for _, y in band) + 1
    for r in system.rules:
        keys = system.keys(r.layers)
        for occ in band_occurrences(r.shape, p, q, height):
            if tuple(keys[band[c]] for c in occ) in r.forbidden:
                return False
    return True


# ----- Wang tiles


@dataclass(frozen=True)
class WangTile:
    name: str
    north: object
    east: object
    south: object
    west: object
    kind: str = ""
    letter: str | None = None


def wang_to_patterns(edges: Sequence[WangTile | tuple], name: str = "") -> TilingSystem:
    """Forbid every domino whose shared edge colors differ."""
    wl = [e if isinstance(e, WangTile) else WangTile(*e) for e in edges]
    tiles = [Tile(i, w.name) for i, w in enumerate(wl)]
    horiz = set()
    vert = set()
    for a, wa in enumerate(wl):
        for b, wb in enumerate(wl):
            if wa.east != wb.west:
                horiz.add((a, b))
            if wa.north != wb.south:
                vert.add((a, b))
    rules = []
    if horiz:
        rules.append(Rule(((0, 0), (1, 0)), frozenset(horiz)))
    if vert:
        rules.append(Rule(((0, 0), (0, 1)), frozenset(vert)))
    return TilingSystem(tiles, rules=rules, name=name)


# ----- determinism


def check_east_deterministic(system: TilingSystem) -> bool:
    """At most one tile fits east of any (west, northwest) pair."""
    for r in system.rules:
        if r.width > 2 or r.height > 2:
            raise UnsupportedShape(f"rule of extent {r.width}x{r.height} does not fit in 2x2")
    n = len(system)
    for w in range(n):
        for nw in range(n):
            base = {(0, 0): w, (0, 1): nw}
            if validate_patch(system, base):
                continue
            fits = 0
            for c in range(n):
                if not validate_patch(system, {**base, (1, 0): c}):
                    fits += 1
            if fits > 1:
                return False
    return True
