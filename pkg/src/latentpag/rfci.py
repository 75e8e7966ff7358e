"""RFCI: triple checks with minimal separating sets and tested discriminating paths."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable

from .graph import ARROW, MixedGraph
from .independence import CachedCi, CiSource
from .orientation import (
    OrientationState,
    discriminating_path,
    orient_discriminated,
    r4_applies,
    r4_triangles,
    run_rules,
)
from .report import RunReport
from .skeleton import SepsetStore, Triple, initial_skeleton


@dataclass
class RfciState:
    """Working graph, sepsets, pending triples ``pending`` and verified triples ``verified``."""

    graph: MixedGraph
    sep: SepsetStore
    pending: list[Triple] = field(default_factory=list)
    verified: list[Triple] = field(default_factory=list)

    def copy(self) -> "RfciState":
        return RfciState(self.graph.copy(), self.sep.copy(), list(self.pending), list(self.verified))


def find_minimal_sepset(ci: CiSource, r: int, j: int, base: Iterable[int]) -> tuple[int, ...]:
    """Smallest subset of ``base`` separating ``r`` and ``j`` (first in combination order)."""
    base = sorted(base)
    for size in range(len(base) + 1):
        for cond in combinations(base, size):
            if ci.independent(r, j, cond):
                return cond
    raise ValueError(f"{base} does not separate {r} and {j}")


def _triangle_triples(g: MixedGraph, a: int, b: int) -> list[Triple]:
    lo, hi = (a, b) if a < b else (b, a)
    return [(lo, v, hi) for v in g.adjacency(lo) if g.is_adjacent(v, hi)]


def _without_edge(triples: list[Triple], a: int, b: int) -> list[Triple]:
    edge = {a, b}
    return [t for t in triples if {t[0], t[1]} != edge and {t[1], t[2]} != edge]


def _triple_phase(state: RfciState, ci: CiSource) -> None:
    g, sep = state.graph, state.sep
    pending, verified = state.pending, state.verified
    while pending:
        triple = pending[0]
        i, j, k = triple
        cond = [v for v in sep[i, k] if v != j]
        indep_ij = ci.independent(i, j, cond)
        indep_jk = ci.independent(j, k, cond)
        if not indep_ij and not indep_jk:
            verified.append(triple)
        else:
            for r, indep in ((i, indep_ij), (k, indep_jk)):
                if not indep:
                    continue
                sep[r, j] = find_minimal_sepset(ci, r, j, cond)
                for t in _triangle_triples(g, r, j):
                    if t not in pending:
                        pending.append(t)
                pending[:] = _without_edge(pending, r, j)
                verified[:] = _without_edge(verified, r, j)
                g.remove_edge(r, j)
        if triple in pending:
            pending.remove(triple)
    m = g._m
    for i, j, k in verified:
        if j not in sep[i, k] and m[i, j] and m[j, k]:
            m[i, j] = ARROW
            m[k, j] = ARROW
    state.verified = []


def rfci_triple_phase(state: RfciState, ci: CiSource) -> RfciState:
    """Check each pending unshielded triple, deleting edges whose dependence fails.

    Verified triples whose middle vertex is outside the sepset become
    v-structures. Returns a new state; the input is not modified.
    """
    out = state.copy()
    _triple_phase(out, ci)
    return out


def _tested_r4(ci: CiSource):
    def rule(st: OrientationState) -> bool:
        g, sep = st.g, st.sep
        changed = False
        rescan = True
        while rescan:
            rescan = False
            for l, j, k in r4_triangles(st):
                if not r4_applies(st, l, j, k):
                    continue
                path = discriminating_path(st, l, j, k)
                if path is None:
                    continue
                base = sep[path[0], k]
                deleted = False
                for r, q in zip(path, path[1:]):
                    if not g.is_adjacent(r, q):
                        continue
                    pool = [v for v in base if v != r and v != q]
                    found = None
                    for size in range(len(pool) + 1):
                        for cond in combinations(pool, size):
                            if ci.independent(r, q, cond):
                                found = cond
                                break
                        if found is not None:
                            break
                    if found is None:
                        continue
                    sep[r, q] = found
                    pending = _triangle_triples(g, r, q)
                    g.remove_edge(r, q)
                    _triple_phase(RfciState(g, sep, pending, []), ci)
                    st._adj = None
                    deleted = True
                if deleted:
                    changed = rescan = True
                    break
                orient_discriminated(st, path, path[-2] in base)
                changed = True
        return changed

    return rule


def rfci_orient_phase(state: RfciState, ci: CiSource) -> RfciState:
    """Orientation loop with the tested discriminating-path rule in place of R4."""
    out = state.copy()
    st = OrientationState(out.graph, out.sep)
    run_rules(st, _tested_r4(ci))
    return out


def run_rfci(ci: CiSource, deadline: float | None = None) -> RunReport:
    start = time.perf_counter()
    base_count = ci.n_tests
    cached = CachedCi(ci, deadline)
    c1, sep, triples = initial_skeleton(cached)
    report = RunReport("rfci", c1, sep, skeleton=c1.copy())
    state = RfciState(c1.copy(), sep, list(triples), [])
    _triple_phase(state, cached)
    st = OrientationState(state.graph, state.sep)
    run_rules(st, _tested_r4(cached))
    report.graph = state.graph
    report.sepsets = state.sep
    report.n_queries = cached.n_tests
    report.n_tests = ci.n_tests - base_count
    report.max_cond_size = cached.max_cond_size
    report.assumed_dependent = getattr(ci, "n_assumed_dependent", 0)
    report.wall_time = time.perf_counter() - start
    return report
