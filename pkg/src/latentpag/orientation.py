"""Zhang's orientation rules R1-R10 and discriminating-path search.

All rules read and write the mark matrix of a :class:`MixedGraph` in place,
where ``m[a, b]`` is the mark at ``b`` on the edge between ``a`` and ``b``.
"""

from __future__ import annotations

from collections import deque
from itertools import combinations
from typing import Callable, Iterable

from .graph import ARROW, CIRCLE, TAIL, MixedGraph
from .skeleton import SepsetStore, Triple


def normalize_triple(a: int, b: int, c: int) -> Triple:
    return (a, b, c) if a < c else (c, b, a)


class OrientationState:
    """Graph, sepsets and (optionally) ambiguous triples seen by the rules."""

    def __init__(self, g: MixedGraph, sep: SepsetStore, ambiguous: Iterable[Triple] = ()):
        self.g = g
        self.m = g._m
        self.sep = sep
        self.ambiguous = {normalize_triple(*t) for t in ambiguous}
        self._adj: list[list[int]] | None = None

    @property
    def adj(self) -> list[list[int]]:
        if self._adj is None:
            self._adj = [self.g.adjacency(v) for v in range(self.g.n_vertices)]
        return self._adj

    def remove_edge(self, a: int, b: int) -> None:
        self.g.remove_edge(a, b)
        self._adj = None

    def triple_ok(self, a: int, b: int, c: int) -> bool:
        return not self.ambiguous or normalize_triple(a, b, c) not in self.ambiguous


def _is_directed(m, a, b) -> bool:
    return m[a, b] == ARROW and m[b, a] == TAIL


def _pd_edge(m, a, b) -> bool:
    """Edge a-b is potentially directed from a to b: not into a, not out of b."""
    return m[b, a] != ARROW and m[a, b] != TAIL


def _circle_edge(m, a, b) -> bool:
    return m[a, b] == CIRCLE and m[b, a] == CIRCLE


def uncovered_path(
    st: OrientationState,
    start: int,
    first: int,
    target: int,
    edge_ok: Callable[[int, int], bool],
    last_ok: Callable[[int], bool] = lambda v: True,
) -> list[int] | None:
    """Depth-first search for a simple uncovered path ``start, first, ..., target``.

    Every edge must satisfy ``edge_ok`` in path direction, every consecutive
    triple must be unshielded (and not ambiguous), and ``last_ok`` is applied
    to the vertex preceding ``target``.
    """
    m, adj = st.m, st.adj
    if not edge_ok(start, first):
        return None
    if first == target:
        return [start, target] if last_ok(start) else None
    stack = [[start, first]]
    while stack:
        path = stack.pop()
        prev, v = path[-2], path[-1]
        for w in reversed(adj[v]):
            if w in path or m[prev, w] or not edge_ok(v, w) or not st.triple_ok(prev, v, w):
                continue
            if w == target:
                if last_ok(v):
                    return path + [w]
                continue
            stack.append(path + [w])
    return None


def discriminating_path(st: OrientationState, l: int, j: int, k: int) -> list[int] | None:
    """Shortest discriminating path ``<theta, ..., l, j, k>`` for ``j``.

    Requires ``l`` to be a parent of ``k`` with an arrowhead at ``l`` on the
    edge ``l - j``. Breadth-first from ``l``; neighbours are expanded in
    ascending index order.
    """
    m, adj = st.m, st.adj
    prev = {l: None}
    queue = deque([l])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w in prev or w == j or w == k or m[w, v] != ARROW:
                continue
            if not m[w, k]:
                path = [w]
                u = v
                while u is not None:
                    path.append(u)
                    u = prev[u]
                return path + [j, k]
            if m[v, w] == ARROW and _is_directed(m, w, k):
                prev[w] = v
                queue.append(w)
    return None


def r4_triangles(st: OrientationState) -> list[Triple]:
    """Triangles ``(l, j, k)`` with ``j o-* k``, ``l <-* j`` and ``l -> k``, sorted."""
    m, adj = st.m, st.adj
    out = []
    for l in range(len(adj)):
        for j in adj[l]:
            if m[j, l] != ARROW:
                continue
            for k in adj[l]:
                if k != j and m[k, j] == CIRCLE and _is_directed(m, l, k):
                    out.append((l, j, k))
    return out


def r4_applies(st: OrientationState, l: int, j: int, k: int) -> bool:
    m = st.m
    return bool(m[j, l] == ARROW and m[k, j] == CIRCLE and _is_directed(m, l, k))


def orient_discriminated(st: OrientationState, path: list[int], in_sepset: bool) -> None:
    m = st.m
    l, j, k = path[-3], path[-2], path[-1]
    if in_sepset:
        m[j, k] = ARROW
        m[k, j] = TAIL
    else:
        m[l, j] = ARROW
        m[j, l] = ARROW
        m[j, k] = ARROW
        m[k, j] = ARROW


def rule1(st: OrientationState) -> bool:
    m, adj = st.m, st.adj
    changed = False
    for b in range(len(adj)):
        for a in adj[b]:
            if m[a, b] != ARROW:
                continue
            for c in adj[b]:
                if c == a or m[c, b] != CIRCLE or m[a, c] or not st.triple_ok(a, b, c):
                    continue
                m[c, b] = TAIL
                m[b, c] = ARROW
                changed = True
    return changed


def rule2(st: OrientationState) -> bool:
    m, adj = st.m, st.adj
    changed = False
    for a in range(len(adj)):
        for c in adj[a]:
            if m[a, c] != CIRCLE:
                continue
            for b in adj[a]:
                if b == c or not m[b, c]:
                    continue
                if (_is_directed(m, a, b) and m[b, c] == ARROW) or (m[a, b] == ARROW and _is_directed(m, b, c)):
                    m[a, c] = ARROW
                    changed = True
                    break
    return changed


def rule3(st: OrientationState) -> bool:
    m, adj = st.m, st.adj
    changed = False
    for b in range(len(adj)):
        for t in adj[b]:
            if m[t, b] != CIRCLE:
                continue
            cands = [x for x in adj[b] if x != t and m[x, b] == ARROW and m[x, t] == CIRCLE]
            for a, c in combinations(cands, 2):
                if not m[a, c] and st.triple_ok(a, t, c):
                    m[t, b] = ARROW
                    changed = True
                    break
    return changed


def rule4(st: OrientationState) -> bool:
    changed = False
    for l, j, k in r4_triangles(st):
        if not r4_applies(st, l, j, k):
            continue
        path = discriminating_path(st, l, j, k)
        if path is None:
            continue
        orient_discriminated(st, path, j in st.sep[path[0], k])
        changed = True
    return changed


def rule5(st: OrientationState) -> bool:
    m, adj = st.m, st.adj
    changed = False
    for a in range(len(adj)):
        for b in adj[a]:
            if not _circle_edge(m, a, b):
                continue
            for c in adj[a]:
                if c == b or m[c, b] or not _circle_edge(m, a, c):
                    continue
                path = uncovered_path(
                    st, a, c, b, lambda u, v: _circle_edge(m, u, v), lambda v: v != c and not m[v, a]
                )
                if path is None:
                    continue
                m[a, b] = m[b, a] = TAIL
                for u, v in zip(path, path[1:]):
                    m[u, v] = m[v, u] = TAIL
                changed = True
                break
    return changed


def rule6(st: OrientationState) -> bool:
    m, adj = st.m, st.adj
    changed = False
    for b in range(len(adj)):
        for a in adj[b]:
            if m[a, b] != TAIL or m[b, a] != TAIL:
                continue
            for c in adj[b]:
                if c != a and m[c, b] == CIRCLE:
                    m[c, b] = TAIL
                    changed = True
    return changed


def rule7(st: OrientationState) -> bool:
    m, adj = st.m, st.adj
    changed = False
    for b in range(len(adj)):
        for a in adj[b]:
            if m[b, a] != TAIL or m[a, b] != CIRCLE:
                continue
            for c in adj[b]:
                if c != a and m[c, b] == CIRCLE and not m[a, c] and st.triple_ok(a, b, c):
                    m[c, b] = TAIL
                    changed = True
    return changed


def rule8(st: OrientationState) -> bool:
    m, adj = st.m, st.adj
    changed = False
    for a in range(len(adj)):
        for c in adj[a]:
            if m[a, c] != ARROW or m[c, a] != CIRCLE:
                continue
            for b in adj[a]:
                if b == c or not _is_directed(m, b, c):
                    continue
                if m[b, a] == TAIL and m[a, b] in (ARROW, CIRCLE):
                    m[c, a] = TAIL
                    changed = True
                    break
    return changed


def _pd_ok(m):
    return lambda u, v: _pd_edge(m, u, v)


def rule9(st: OrientationState) -> bool:
    m, adj = st.m, st.adj
    changed = False
    for a in range(len(adj)):
        for c in adj[a]:
            if m[a, c] != ARROW or m[c, a] != CIRCLE:
                continue
            for b in adj[a]:
                if b == c or m[b, c]:
                    continue
                if uncovered_path(st, a, b, c, _pd_ok(m)) is not None:
                    m[c, a] = TAIL
                    changed = True
                    break
    return changed


def rule10(st: OrientationState) -> bool:
    m, adj = st.m, st.adj
    changed = False
    for a in range(len(adj)):
        for c in adj[a]:
            if m[a, c] != ARROW or m[c, a] != CIRCLE:
                continue
            parents = [b for b in adj[c] if b != a and _is_directed(m, b, c)]
            if len(parents) < 2:
                continue
            starts = [u for u in adj[a] if _pd_edge(m, a, u)]
            reach = {
                (u, t): uncovered_path(st, a, u, t, _pd_ok(m)) is not None for u in starts for t in parents
            }
            done = False
            for b, t in combinations(parents, 2):
                for mu in starts:
                    for om in starts:
                        if mu == om or m[mu, om] or not st.triple_ok(mu, a, om):
                            continue
                        if (reach[mu, b] and reach[om, t]) or (reach[mu, t] and reach[om, b]):
                            m[c, a] = TAIL
                            changed = done = True
                            break
                    if done:
                        break
                if done:
                    break
    return changed


RULES_1_TO_3 = (rule1, rule2, rule3)
RULES_5_TO_10 = (rule5, rule6, rule7, rule8, rule9, rule10)


def run_rules(st: OrientationState, r4: Callable[[OrientationState], bool] = rule4) -> None:
    """R1-R3 to a fixpoint, then R4, then R5-R10; repeated until nothing changes."""
    while True:
        changed = False
        while True:
            step = False
            for rule in RULES_1_TO_3:
                step = rule(st) or step
            if not step:
                break
            changed = True
        changed = r4(st) or changed
        for rule in RULES_5_TO_10:
            changed = rule(st) or changed
        if not changed:
            return


def zhang_orientation_rules(
    g: MixedGraph, sep: SepsetStore, ambiguous: Iterable[Triple] = ()
) -> MixedGraph:
    """Apply R1-R10 to a copy of ``g``.

    Rules whose premise relies on an unshielded triple listed in
    ``ambiguous`` do not fire on that triple.
    """
    out = g.copy()
    run_rules(OrientationState(out, sep, ambiguous))
    return out
