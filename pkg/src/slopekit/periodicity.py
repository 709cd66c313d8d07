"""Periodic tilings along a fixed vector via the strip graph.

Nodes are |p| x H blocks whose skewed extension along (p, q) is valid;
an edge u -> v means v may sit directly on top of u. Biinfinite walks are
exactly the (p, q)-periodic tilings.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .core import (
    DomainError,
    Pattern,
    PeriodVector,
    TilingSystem,
    band_occurrences,
    skew_offsets,
)

DEFAULT_NODE_BUDGET = 2_000_000


class BudgetExceeded(RuntimeError):
    def __init__(self, count: int, budget: int, bound: int | None = None, what: str = "nodes"):
        self.count = count
        self.budget = budget
        self.bound = bound
        self.what = what
        msg = f"{what} budget {budget} exceeded after {count}"
        if bound is not None:
            msg += f" (raw bound |T|^area = {bound})"
        super().__init__(msg)


class Kind(enum.Enum):
    BIPERIODIC_ONLY = "biperiodic-only"
    DIRECTION_ONLY = "direction-only"


@dataclass(frozen=True)
class Strip:
    vector: PeriodVector
    block: Pattern
    index: int

    @property
    def key(self) -> tuple[int, ...]:
        """Tile ids row by row, bottom row first."""
        return tuple(t for _, t in sorted(self.block.cells, key=lambda c: (c[0][1], c[0][0])))


@dataclass
class Frame:
    """How a requested vector maps onto the internal p > 0 geometry."""

    vector: PeriodVector
    p: int
    q: int
    transposed: bool

    @classmethod
    def of(cls, vector: PeriodVector) -> "Frame":
        p, q = vector.p, vector.q
        if p == 0:
            return cls(vector, abs(q), 0, True)
        if p < 0:
            p, q = -p, -q
        return cls(vector, p, q, False)

    def system(self, system: TilingSystem) -> TilingSystem:
        return system.transpose() if self.transposed else system


@dataclass
class StripGraph:
    """Strips and their stacking relation, stored factored.

    Whether v may sit on u depends only on the rows of u read across the
    seam (its lower group) and the rows of v read across it (its upper
    group), so edges are kept as lower group -> allowed upper groups.
    """

    vector: PeriodVector
    k: int
    height: int
    frame: Frame
    nodes: list[Strip]
    lower: list[int]
    upper: list[int]
    allowed: list[list[int]]
    members: list[list[int]]

    @property
    def edge_count(self) -> int:
        sizes = [sum(len(self.members[h]) for h in hs) for hs in self.allowed]
        return sum(sizes[g] for g in self.lower)

    def has_edge(self, u: int, v: int) -> bool:
        return self.upper[v] in self.allowed[self.lower[u]]

    def successors(self, u: int) -> list[int]:
        return sorted(v for h in self.allowed[self.lower[u]] for v in self.members[h])

    @property
    def edges(self) -> list[list[int]]:
        """Plain adjacency lists; quadratic in the worst case, meant for small graphs."""
        return [self.successors(u) for u in range(len(self.nodes))]

    def factored(self) -> list[list[int]]:
        """Adjacency of the graph with one extra vertex per group.

        Vertices 0..N-1 are strips, then lower groups, then upper groups;
        strip -> its lower group -> allowed upper groups -> their strips.
        Closed walks correspond one to one with those of the strip graph.
        """
        n, nl = len(self.nodes), len(self.allowed)
        adj = [[n + g] for g in self.lower]
        adj += [[n + nl + h for h in hs] for hs in self.allowed]
        adj += [list(m) for m in self.members]
        return adj


@dataclass(frozen=True)
class PeriodicWitness:
    vector: PeriodVector
    kind: Kind
    cycle_a: tuple[int, ...]
    cycle_b: tuple[int, ...]
    connector: tuple[int, ...]
    k: int
    height: int
    blocks: dict = field(hash=False, compare=False)

    @property
    def frame(self) -> Frame:
        return Frame.of(self.vector)


def _required_height(system: TilingSystem, p: int, q: int) -> int:
    """Smallest block height for which pairwise stacking checks suffice."""
    need = 1
    for r in system.rules:
        for offs in skew_offsets(r.shape, p, q):
            ds = [d for _, d in offs]
            need = max(need, max(ds) - min(ds))
    return need


def _strip_k(system: TilingSystem, frame: Frame) -> int:
    base = frame.system(system)
    k = base.k
    unit = max(abs(frame.q), 1)
    need = _required_height(base, frame.p, frame.q)
    return max(k, -(-need // unit))


def _pair_relations(keys, forbidden, n: int) -> tuple[list[int], list[int]]:
    """For a two-cell rule: allowed second tiles per first tile, and the reverse."""
    fwd = [0] * n
    back = [0] * n
    for a in range(n):
        for b in range(n):
            if (keys[a], keys[b]) not in forbidden:
                fwd[a] |= 1 << b
                back[b] |= 1 << a
    return fwd, back


def _enumerate_blocks(system: TilingSystem, p: int, q: int, height: int, budget: int) -> list[tuple]:
    """All valid p x height blocks, as column-major tuples of tile ids.

    Two-cell constraints become bitmask tables keyed by the earlier cell's
    tile, so each cell only tries tiles compatible with what is already
    placed; larger constraints are checked once their last cell is set.
    """
    cells = [(i, j) for i in range(p) for j in range(height)]
    pos = {c: n for n, c in enumerate(cells)}
    n = len(system)
    area = len(cells)
    full = (1 << n) - 1
    unary = [full] * area
    tables: list[dict[int, list[int]]] = [{} for _ in cells]
    checks: list[list] = [[] for _ in cells]
    for r in system.rules:
        keys = system.keys(r.layers)
        rel = None
        for occ in band_occurrences(r.shape, p, q, height):
            idx = tuple(pos[c] for c in occ)
            last = max(idx)
            if len(idx) == 2 and idx[0] != idx[1]:
                if rel is None:
                    rel = _pair_relations(keys, r.forbidden, n)
                other = idx[0] if idx[1] == last else idx[1]
                table = tables[last].setdefault(other, [full] * n)
                src = rel[0] if idx[0] == other else rel[1]
                for a in range(n):
                    table[a] &= src[a]
            elif len(set(idx)) == 1:
                for t in range(n):
                    if tuple(keys[t] for _ in idx) in r.forbidden:
                        unary[last] &= ~(1 << t)
            else:
                checks[last].append((idx, keys, r.forbidden))
    pair_list = [sorted(tb.items()) for tb in tables]
    out: list[tuple] = []
    cur = [0] * area

    def ok(at: int) -> bool:
        for idx, keys, bad in checks[at]:
            if tuple(keys[cur[i]] for i in idx) in bad:
                return False
        return True

    def candidates(at: int) -> int:
        m = unary[at]
        for other, table in pair_list[at]:
            m &= table[cur[other]]
            if not m:
                break
        return m

    # iterative backtracking keeps deep bands off the recursion limit
    at = 0
    todo = [0] * (area + 1)
    todo[0] = candidates(0)
    while at >= 0:
        if at == area:
            out.append(tuple(cur))
            if len(out) > budget:
                raise BudgetExceeded(len(out), budget, n ** area)
            at -= 1
            continue
        m = todo[at]
        placed = False
        while m:
            low = m & -m
            m ^= low
            cur[at] = low.bit_length() - 1
            if ok(at):
                placed = True
                break
        todo[at] = m
        if not placed:
            at -= 1
            continue
        at += 1
        if at < area:
            todo[at] = candidates(at)
    return out


def build_strip_nodes(system: TilingSystem, vector: PeriodVector, k: int,
                      budget: int = DEFAULT_NODE_BUDGET) -> list[Strip]:
    frame = Frame.of(vector)
    sys_ = frame.system(system)
    height = k * max(abs(frame.q), 1)
    return _make_strips(sys_, frame, height, budget)


def _make_strips(sys_: TilingSystem, frame: Frame, height: int, budget: int) -> list[Strip]:
    p = frame.p
    raw = _enumerate_blocks(sys_, p, frame.q, height, budget)
    cells = [(i, j) for i in range(p) for j in range(height)]
    blocks = [Pattern(tuple(sorted(zip(cells, b)))) for b in raw]
    blocks.sort(key=lambda b: tuple(t for _, t in sorted(b.cells, key=lambda c: (c[0][1], c[0][0]))))
    return [Strip(frame.vector, b, i) for i, b in enumerate(blocks)]


def build_strip_graph(system: TilingSystem, vector: PeriodVector,
                      budget: int = DEFAULT_NODE_BUDGET, k: int | None = None) -> StripGraph:
    frame = Frame.of(vector)
    sys_ = frame.system(system)
    if k is None:
        k = _strip_k(system, frame)
    p, q = frame.p, frame.q
    height = k * max(abs(q), 1)
    nodes = _make_strips(sys_, frame, height, budget)

    # occurrences that straddle the seam between two stacked blocks
    cross = []
    for r in sys_.rules:
        keys = sys_.keys(r.layers)
        for occ in band_occurrences(r.shape, p, q, 2 * height):
            rows = [j for _, j in occ]
            if min(rows) < height <= max(rows):
                cross.append((occ, keys, r.forbidden))
    low_cells = sorted({c for occ, _, _ in cross for c in occ if c[1] < height})
    high_cells = sorted({(i, j - height) for occ, _, _ in cross for i, j in occ if j >= height})

    def sig(node: Strip, cells):
        d = node.block.as_dict()
        return tuple(d[c] for c in cells)

    low_groups: dict[tuple, list[int]] = {}
    high_groups: dict[tuple, list[int]] = {}
    for nd in nodes:
        low_groups.setdefault(sig(nd, low_cells), []).append(nd.index)
        high_groups.setdefault(sig(nd, high_cells), []).append(nd.index)

    # per seam constraint: which upper signatures survive, given the lower cells it reads
    high_list = list(high_groups.items())
    low_at = {c: n for n, c in enumerate(low_cells)}
    high_at = {c: n for n, c in enumerate(high_cells)}
    everyone = (1 << len(high_list)) - 1
    seams = []
    for occ, keys, bad in cross:
        lo = [low_at[c] for c in occ if c[1] < height]
        hi = [high_at[(c[0], c[1] - height)] for c in occ if c[1] >= height]
        seams.append((occ, keys, bad, lo, hi, {}))

    def survivors(seam, ls) -> int:
        occ, keys, bad, lo, hi, cache = seam
        part = tuple(ls[i] for i in lo)
        mask = cache.get(part)
        if mask is None:
            mask = 0
            for g, (hs, _) in enumerate(high_list):
                lit = iter(part)
                hit = iter(hs[i] for i in hi)
                ids = tuple(next(lit) if c[1] < height else next(hit) for c in occ)
                if tuple(keys[t] for t in ids) not in bad:
                    mask |= 1 << g
            cache[part] = mask
        return mask

    lower = [0] * len(nodes)
    upper = [0] * len(nodes)
    for h, (_, vs) in enumerate(high_list):
        for v in vs:
            upper[v] = h
    allowed: list[list[int]] = []
    count = 2 * len(nodes)
    for g, (ls, us) in enumerate(low_groups.items()):
        for u in us:
            lower[u] = g
        mask = everyone
        for seam in seams:
            mask &= survivors(seam, ls)
            if not mask:
                break
        hs = []
        while mask:
            low = mask & -mask
            mask ^= low
            hs.append(low.bit_length() - 1)
        allowed.append(hs)
        count += len(hs)
        if count > budget:
            raise BudgetExceeded(count, budget, what="edges")
    members = [vs for _, vs in high_list]
    return StripGraph(vector, k, height, frame, nodes, lower, upper, allowed, members)


# ----- cycle structure


def strongly_connected_components(n: int, edges: Sequence[Sequence[int]]) -> list[list[int]]:
    """Tarjan's algorithm, iterative. Components come out in reverse topological order."""
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            recurse = False
            while i < len(edges[v]):
                w = edges[v][i]
                i += 1
                if index[w] == -1:
                    work.append((v, i))
                    work.append((w, 0))
                    recurse = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
            if work:
                u, _ = work[-1]
                low[u] = min(low[u], low[v])
    return comps


def _bfs_path(edges, src: int, targets, allowed=None) -> list[int] | None:
    """Shortest path src -> any target (length >= 1), restricted to `allowed` nodes."""
    prev = {}
    dq = deque()
    for w in edges[src]:
        if allowed is not None and w not in allowed:
            continue
        if w not in prev:
            prev[w] = src
            dq.append(w)
    while dq:
        v = dq.popleft()
        if v in targets:
            path = [v]
            while True:
                path.append(prev[path[-1]])
                if path[-1] == src:
                    return path[::-1]
        for w in edges[v]:
            if allowed is not None and w not in allowed:
                continue
            if w not in prev:
                prev[w] = v
                dq.append(w)
    return None


def _cycle_through(edges, u: int, first: int, comp: set) -> list[int]:
    """Simple cycle starting u -> first and returning to u inside comp."""
    if first == u:
        return [u]
    back = _bfs_path(edges, first, {u}, comp)
    return [u] + back[:-1]


def _walk_form(n: int, a_aux, path_aux, b_aux):
    """Strip walk (cycle_a, connector, cycle_b) from closed walks in the factored graph.

    The walk is a_aux repeated, then path_aux (which starts where a_aux
    starts), then b_aux from its second vertex on, repeated; only strips
    (vertices below n) are kept.
    """
    pre = [v for v in a_aux if v < n]
    post = [v for v in list(b_aux[1:]) + [b_aux[0]] if v < n]
    conn = [pre[-1]] + [v for v in path_aux if v < n] + [post[0]]
    return [pre[-1]] + pre[:-1], conn, post


def decide_periodic(system: TilingSystem, vector: PeriodVector,
                    budget: int = DEFAULT_NODE_BUDGET,
                    graph: StripGraph | None = None) -> PeriodicWitness | None:
    if graph is None:
        graph = build_strip_graph(system, vector, budget)
    n = len(graph.nodes)
    edges = graph.factored()
    comps = strongly_connected_components(len(edges), edges)
    # every closed walk passes through a strip, so a cyclic component has more than one vertex
    cyclic = [c for c in comps if len(c) > 1]
    if not cyclic:
        return None
    cyclic.sort()
    comp_of = {}
    for ci, c in enumerate(cyclic):
        for v in c:
            comp_of[v] = ci

    def witness(kind, a, conn, b):
        used = set(a) | set(b) | set(conn)
        return PeriodicWitness(graph.vector, kind, tuple(a), tuple(b), tuple(conn), graph.k,
                               graph.height, {i: graph.nodes[i] for i in sorted(used)})

    # a component carrying two distinct cycles
    for c in cyclic:
        cs = set(c)
        inner = sum(1 for v in c for w in edges[v] if w in cs)
        if inner > len(c):
            for u in c:
                outs = [w for w in edges[u] if w in cs]
                if len(outs) >= 2:
                    ca = _cycle_through(edges, u, outs[0], cs)
                    cb = _cycle_through(edges, u, outs[1], cs)
                    return witness(Kind.DIRECTION_ONLY, *_walk_form(n, ca, [u], cb))

    # two cyclic components joined by a path
    for ci, c in enumerate(cyclic):
        cs = set(c)
        others = {v for cj, d in enumerate(cyclic) if cj != ci for v in d}
        for u in c:
            path = _bfs_path(edges, u, others)
            if path is None:
                continue
            # trim the prefix that stays inside the source component
            start = max(i for i, v in enumerate(path) if v in cs)
            path = path[start:]
            c0, cm = path[0], path[-1]
            ca = _cycle_through(edges, c0, next(w for w in edges[c0] if w in cs), cs)
            dm = set(cyclic[comp_of[cm]])
            cb = _cycle_through(edges, cm, next(w for w in edges[cm] if w in dm), dm)
            return witness(Kind.DIRECTION_ONLY, *_walk_form(n, ca, path, cb))

    c = cyclic[0]
    cs = set(c)
    u = next(v for v in c if v < n)
    first = next(w for w in edges[u] if w in cs)
    loop = [v for v in _cycle_through(edges, u, first, cs) if v < n]
    return witness(Kind.BIPERIODIC_ONLY, loop, [], [])


def _block_at(witness: PeriodicWitness, i: int) -> int:
    a, b, conn = witness.cycle_a, witness.cycle_b, witness.connector
    if witness.kind is Kind.BIPERIODIC_ONLY:
        return a[i % len(a)]
    m = len(conn) - 1
    if i < 0:
        return a[i % len(a)]
    if i < m:
        return conn[i]
    return b[(i - m) % len(b)]


def realize_witness_patch(system: TilingSystem, witness: PeriodicWitness, width: int, height: int,
                          origin: tuple[int, int] = (0, 0)) -> Pattern:
    """Window of the periodic tiling read off the witness walk.

    Block 0 is the first connector node; negative blocks repeat cycle_a and
    blocks past the connector repeat cycle_b.
    """
    if width <= 0 or height <= 0:
        raise DomainError("window dimensions must be positive")
    frame = witness.frame
    p, q, hgt = frame.p, frame.q, witness.height
    blocks = {i: s.block.as_dict() for i, s in witness.blocks.items()}
    ox, oy = origin
    out = {}
    for y in range(height):
        for x in range(width):
            gx, gy = ox + x, oy + y
            ix, iy = (gy, gx) if frame.transposed else (gx, gy)
            col = ix % p
            yy = iy - (ix // p) * q
            node = _block_at(witness, yy // hgt)
            out[(x, y)] = blocks[node][(col, yy % hgt)]
    return Pattern.from_dict(out)
