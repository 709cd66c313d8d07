"""Exact search for valid fills of a finite grid.

Cells are variables, domains are bitmasks over tile ids. Two-cell rules
become binary tables and are kept arc consistent; larger rules are checked
as soon as all but one of their cells are fixed. Cells are branched in
row-major order (bottom row first) and values in increasing id order, so
the first solution is deterministic.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, Iterator, Mapping

from .core import Cell, Pattern, TilingSystem

DEFAULT_SEARCH_BUDGET = 2_000_000


class SearchBudgetExceeded(RuntimeError):
    def __init__(self, nodes: int, budget: int):
        self.nodes = nodes
        self.budget = budget
        super().__init__(f"search budget {budget} exceeded")


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class GridSearch:
    def __init__(self, system: TilingSystem, width: int, height: int,
                 domains: Mapping[Cell, Iterable[int]] | None = None,
                 budget: int = DEFAULT_SEARCH_BUDGET):
        if width < 1 or height < 1:
            raise ValueError("grid must be nonempty")
        self.system = system
        self.width, self.height = width, height
        self.budget = budget
        self.nodes = 0
        self.cells = [(x, y) for y in range(height) for x in range(width)]
        pos = {c: i for i, c in enumerate(self.cells)}
        n = len(system)
        full = (1 << n) - 1
        dom = [full] * len(self.cells)
        if domains:
            for c, ids in domains.items():
                if c in pos:
                    m = 0
                    for t in ids:
                        m |= 1 << t
                    dom[pos[c]] &= m
        self.arcs: list[list[tuple[int, list[int]]]] = [[] for _ in self.cells]
        pair_tables: dict[tuple[int, int], list[int]] = {}
        self.general: list[tuple[tuple[int, ...], tuple, frozenset]] = []
        self.general_at: list[list[int]] = [[] for _ in self.cells]

        for r in system.rules:
            keys = system.keys(r.layers)
            if len(r.shape) == 1:
                banned = {b[0] for b in r.forbidden}
                m = 0
                for t in range(n):
                    if keys[t] not in banned:
                        m |= 1 << t
                dom = [d & m for d in dom]
                continue
            if len(r.shape) == 2:
                rel = self._relation(keys, r.forbidden, n)
                (ax, ay), (bx, by) = r.shape
                for x in range(width):
                    for y in range(height):
                        a = (x + ax, y + ay)
                        b = (x + bx, y + by)
                        if a in pos and b in pos:
                            i, j = pos[a], pos[b]
                            fwd = pair_tables.setdefault((i, j), [full] * n)
                            for t in range(n):
                                fwd[t] &= rel[t]
                continue
            for x in range(width):
                for y in range(height):
                    cs = [(x + dx, y + dy) for dx, dy in r.shape]
                    if all(c in pos for c in cs):
                        idx = tuple(pos[c] for c in cs)
                        gi = len(self.general)
                        self.general.append((idx, keys, r.forbidden))
                        for i in idx:
                            self.general_at[i].append(gi)

        for (i, j), fwd in pair_tables.items():
            back = [0] * n
            for a in range(n):
                for b in _bits(fwd[a]):
                    back[b] |= 1 << a
            self.arcs[i].append((j, fwd))
            self.arcs[j].append((i, back))
        self.initial = dom

    @staticmethod
    def _relation(keys, forbidden, n) -> list[int]:
        rel = []
        for a in range(n):
            m = 0
            for b in range(n):
                if (keys[a], keys[b]) not in forbidden:
                    m |= 1 << b
            rel.append(m)
        return rel

    # ----- propagation

    def _propagate(self, dom: list[int], changed: Iterable[int]) -> bool:
        queue = deque(changed)
        queued = set(queue)
        while queue:
            j = queue.popleft()
            queued.discard(j)
            dj = dom[j]
            # arcs stored at j point to neighbours i with table j->i; revise each i against j
            for i, table in self.arcs[j]:
                di = dom[i]
                back = 0
                for b in _bits(dj):
                    back |= table[b]
                nd = di & back
                if nd != di:
                    if not nd:
                        return False
                    dom[i] = nd
                    if i not in queued:
                        queue.append(i)
                        queued.add(i)
            for gi in self.general_at[j]:
                idx, keys, bad = self.general[gi]
                free = [i for i in idx if dom[i] & (dom[i] - 1)]
                if len(free) > 1:
                    continue
                if not free:
                    ids = tuple(keys[dom[i].bit_length() - 1] for i in idx)
                    if ids in bad:
                        return False
                    continue
                f = free[0]
                keep = 0
                for t in _bits(dom[f]):
                    ids = tuple(keys[t] if i == f else keys[dom[i].bit_length() - 1] for i in idx)
                    if ids not in bad:
                        keep |= 1 << t
                if keep != dom[f]:
                    if not keep:
                        return False
                    dom[f] = keep
                    if f not in queued:
                        queue.append(f)
                        queued.add(f)
        return True

    def solutions(self, limit: int | None = 1) -> Iterator[Pattern]:
        dom = list(self.initial)
        if any(d == 0 for d in dom):
            return
        if not self._propagate(dom, range(len(dom))):
            return
        yielded = 0
        # frames are (domains, cell being branched, values still to try)
        stack = [(dom, -1, 0)]
        while stack:
            dom, at, todo = stack.pop()
            if at >= 0:
                if not todo:
                    continue
                t = (todo & -todo).bit_length() - 1
                stack.append((dom, at, todo ^ (1 << t)))
                self.nodes += 1
                if self.nodes > self.budget:
                    raise SearchBudgetExceeded(self.nodes, self.budget)
                nd = list(dom)
                nd[at] = 1 << t
                if not self._propagate(nd, [at]):
                    continue
                dom = nd
            nxt = at + 1
            while nxt < len(dom) and dom[nxt] & (dom[nxt] - 1) == 0:
                nxt += 1
            if nxt == len(dom):
                yield Pattern(tuple(sorted(
                    (c, dom[i].bit_length() - 1) for i, c in enumerate(self.cells))))
                yielded += 1
                if limit is not None and yielded >= limit:
                    return
                continue
            stack.append((dom, nxt, dom[nxt]))


def solve_grid(system: TilingSystem, width: int, height: int,
               domains: Mapping[Cell, Iterable[int]] | None = None,
               budget: int = DEFAULT_SEARCH_BUDGET) -> Pattern | None:
    return next(GridSearch(system, width, height, domains, budget).solutions(1), None)


def all_fills(system: TilingSystem, width: int, height: int,
              domains: Mapping[Cell, Iterable[int]] | None = None,
              budget: int = DEFAULT_SEARCH_BUDGET, limit: int | None = None) -> list[Pattern]:
    return list(GridSearch(system, width, height, domains, budget).solutions(limit))
