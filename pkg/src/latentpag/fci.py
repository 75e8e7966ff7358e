"""The FCI family: FCI, FCI_path, CFCI, SCFCI and the adaptive anytime variants."""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Iterable, Sequence

from .graph import ARROW, CIRCLE, MixedGraph, biconnected_components, component_vertices
from .independence import CachedCi, CiSource
from .orientation import OrientationState, run_rules, zhang_orientation_rules
from .report import RunReport
from .skeleton import SepsetStore, Triple, initial_skeleton, unshielded_triples

__all__ = [
    "Conservative",
    "FciConfig",
    "PdsMode",
    "TripleStatus",
    "classify_triples_conservative",
    "final_skeleton",
    "orient_v_structures",
    "pds_path",
    "pds_profile",
    "possible_d_sep",
    "run_fci",
    "zhang_orientation_rules",
]


class PdsMode(Enum):
    FULL = "full"
    PATH = "path"


class Conservative(Enum):
    OFF = "off"
    STEP2 = "step2"
    STEP2_AND_4 = "step2and4"


ADAPTIVE = "adaptive"


@dataclass(frozen=True)
class FciConfig:
    """Variant selector.

    ``cutoff`` is ``None`` (no limit), ``"adaptive"`` (largest initial
    adjacency size minus one) or a non-negative integer giving the largest
    conditioning-set size tried in the final-skeleton search.
    """

    pds_mode: PdsMode = PdsMode.FULL
    conservative: Conservative = Conservative.OFF
    cutoff: int | str | None = None

    def __post_init__(self):
        if self.cutoff is not None and self.cutoff != ADAPTIVE:
            if not isinstance(self.cutoff, int) or self.cutoff < 0:
                raise ValueError("cutoff must be None, 'adaptive' or a non-negative integer")

    @classmethod
    def from_name(cls, name: str, cutoff: int | str | None = None) -> "FciConfig":
        """Build the configuration for names such as ``fci``, ``cfcipath`` or ``scaafci``."""
        rest = name.lower()
        pds_mode = PdsMode.FULL
        if rest.endswith("path"):
            pds_mode = PdsMode.PATH
            rest = rest[: -len("path")]
        conservative = Conservative.OFF
        if rest.startswith("sc"):
            conservative = Conservative.STEP2_AND_4
            rest = rest[2:]
        elif rest.startswith("c"):
            conservative = Conservative.STEP2
            rest = rest[1:]
        if rest == "aafci":
            cutoff = ADAPTIVE if cutoff is None else cutoff
        elif rest != "fci":
            raise ValueError(f"unknown algorithm {name!r}")
        return cls(pds_mode, conservative, cutoff)


class TripleStatus(Enum):
    UNAMBIGUOUS_COLLIDER = "collider"
    UNAMBIGUOUS_NONCOLLIDER = "noncollider"
    AMBIGUOUS = "ambiguous"


def orient_v_structures(g: MixedGraph, sep: SepsetStore, triples: Iterable[Triple]) -> MixedGraph:
    """Put arrowheads at ``j`` for every triple whose middle vertex is outside the sepset."""
    out = g.copy()
    m = out._m
    for i, j, k in triples:
        if j not in sep[i, k]:
            m[i, j] = ARROW
            m[k, j] = ARROW
    return out


def possible_d_sep(g: MixedGraph, i: int) -> list[int]:
    """Vertices reachable from ``i`` along paths whose every inner triple is a collider or a triangle.

    The search runs over (previous, current) vertex pairs, so it follows
    walks: a vertex may be passed twice. The result therefore contains the
    simple-path set and occasionally a little more.
    """
    m = g._m
    adj = [g.adjacency(v) for v in range(g.n_vertices)]
    found = set(adj[i])
    seen = {(i, k) for k in adj[i]}
    queue = deque(seen)
    while queue:
        a, b = queue.popleft()
        for c in adj[b]:
            if c == a or c == i or (b, c) in seen:
                continue
            if (m[a, b] == ARROW and m[c, b] == ARROW) or m[a, c]:
                seen.add((b, c))
                found.add(c)
                queue.append((b, c))
    return sorted(found)


def pds_path(
    g: MixedGraph,
    i: int,
    j: int,
    bicomp: Sequence[set[tuple[int, int]]] | None = None,
    pds: Sequence[int] | None = None,
) -> list[int]:
    """Possible-D-SEP of ``i`` restricted to the biconnected component of edge ``i - j``."""
    if not g.is_adjacent(i, j):
        raise ValueError(f"vertices {i} and {j} are not adjacent")
    if bicomp is None:
        bicomp = biconnected_components(g)
    verts = component_vertices(bicomp)[(min(i, j), max(i, j))]
    if pds is None:
        pds = possible_d_sep(g, i)
    return [v for v in pds if v in verts]


def _resolve_cutoff(cutoff, g: MixedGraph) -> int | None:
    if cutoff == ADAPTIVE:
        return max((len(g.adjacency(v)) - 1 for v in range(g.n_vertices)), default=0)
    return cutoff


class _PdsTable:
    def __init__(self, g: MixedGraph, mode: PdsMode):
        self.g = g
        self.mode = mode
        self.full = [possible_d_sep(g, v) for v in range(g.n_vertices)]
        self.comp = component_vertices(biconnected_components(g)) if mode is PdsMode.PATH else None

    def get(self, i: int, j: int) -> list[int]:
        if self.mode is PdsMode.FULL:
            return self.full[i]
        verts = self.comp[(min(i, j), max(i, j))]
        return [v for v in self.full[i] if v in verts]

    def max_sizes(self) -> list[int]:
        """Per vertex, the largest set used as a conditioning pool."""
        if self.mode is PdsMode.FULL:
            return [len(s) for s in self.full]
        return [max((len(self.get(i, j)) for j in self.g.adjacency(i)), default=0) for i in range(self.g.n_vertices)]


def final_skeleton(
    g: MixedGraph, sep: SepsetStore, ci: CiSource, cfg: FciConfig = FciConfig()
) -> tuple[MixedGraph, SepsetStore, list[Triple]]:
    """Remove edges separated by subsets of Possible-D-SEP sets of the oriented graph ``g``.

    Possible-D-SEP sets are computed once from ``g``. Afterwards every
    remaining edge is reset to ``o-o``.
    """
    c = g.copy()
    sep = sep.copy()
    table = _PdsTable(g, cfg.pds_mode)
    limit = _resolve_cutoff(cfg.cutoff, g)
    for i in range(c.n_vertices):
        for j in c.adjacency(i):
            if not c.is_adjacent(i, j):
                continue
            pool = [v for v in table.get(i, j) if v != j]
            level = 0
            removed = False
            while level <= len(pool) and not removed:
                for cond in combinations(pool, level):
                    if ci.independent(i, j, cond):
                        c.remove_edge(i, j)
                        sep[i, j] = cond
                        removed = True
                        break
                if limit is not None and level >= limit:
                    break
                level += 1
    c.reset_marks(CIRCLE)
    return c, sep, unshielded_triples(c)


def classify_triples_conservative(
    g: MixedGraph, ci: CiSource, sep: SepsetStore, triples: Iterable[Triple]
) -> dict[Triple, TripleStatus]:
    """Label each unshielded triple by whether all local separating sets agree on its middle vertex.

    Every subset of ``adj(g, i)`` and of ``adj(g, k)`` is tested; the
    separating ones are recorded in ``sep.local_sets``.
    """
    status = {}
    for i, j, k in triples:
        found = []
        seen = set()
        for pool in (g.adjacency(i), g.adjacency(k)):
            pool = [v for v in pool if v not in (i, k)]
            for size in range(len(pool) + 1):
                for cond in combinations(pool, size):
                    if cond in seen:
                        continue
                    seen.add(cond)
                    if ci.independent(i, k, cond):
                        found.append(cond)
        sep.local_sets[(i, k)] = found
        in_sepset = j in sep[i, k]
        if not found:
            status[i, j, k] = (
                TripleStatus.UNAMBIGUOUS_NONCOLLIDER if in_sepset else TripleStatus.UNAMBIGUOUS_COLLIDER
            )
        elif all(j in s for s in found) and in_sepset:
            status[i, j, k] = TripleStatus.UNAMBIGUOUS_NONCOLLIDER
        elif not any(j in s for s in found) and not in_sepset:
            status[i, j, k] = TripleStatus.UNAMBIGUOUS_COLLIDER
        else:
            status[i, j, k] = TripleStatus.AMBIGUOUS
    return status


def _conservative_orientation(g, ci, sep, triples):
    status = classify_triples_conservative(g, ci, sep, triples)
    colliders = [t for t in triples if status[t] is TripleStatus.UNAMBIGUOUS_COLLIDER]
    ambiguous = [t for t in triples if status[t] is TripleStatus.AMBIGUOUS]
    return orient_v_structures(g, sep, colliders), colliders, ambiguous


def _count_v_structures(sep: SepsetStore, triples: Iterable[Triple]) -> int:
    return sum(1 for i, j, k in triples if j not in sep[i, k])


def _algorithm_name(cfg: FciConfig) -> str:
    prefix = {Conservative.OFF: "", Conservative.STEP2: "c", Conservative.STEP2_AND_4: "sc"}[cfg.conservative]
    base = "aafci" if cfg.cutoff == ADAPTIVE else "fci"
    name = prefix + base + ("path" if cfg.pds_mode is PdsMode.PATH else "")
    if isinstance(cfg.cutoff, int):
        name += f"-k{cfg.cutoff}"
    return name


def _steps_one_two(ci: CiSource, cfg: FciConfig, report: RunReport):
    c1, sep, triples = initial_skeleton(ci)
    report.skeleton = c1.copy()
    report.v_structures["step2_candidates"] = _count_v_structures(sep, triples)
    if cfg.conservative is Conservative.OFF:
        c2 = orient_v_structures(c1, sep, triples)
        report.v_structures["step2"] = report.v_structures["step2_candidates"]
    else:
        c2, colliders, ambiguous = _conservative_orientation(c1, ci, sep, triples)
        report.v_structures["step2"] = len(colliders)
        report.ambiguous_triples = ambiguous
    report.pds_graph = c2.copy()
    return c2, sep


def pds_profile(ci: CiSource, cfg: FciConfig = FciConfig()) -> list[int]:
    """Per-vertex Possible-D-SEP sizes a full run of ``cfg`` would search.

    Runs only the first two steps; the sets are fixed once the graph entering
    the final-skeleton search is known.
    """
    report = RunReport(_algorithm_name(cfg), MixedGraph(0), SepsetStore())
    c2, _ = _steps_one_two(CachedCi(ci), cfg, report)
    return _PdsTable(c2, cfg.pds_mode).max_sizes()


def run_fci(ci: CiSource, cfg: FciConfig = FciConfig(), deadline: float | None = None) -> RunReport:
    """Run the configured FCI variant end to end.

    ``deadline`` is an absolute :func:`time.monotonic` value after which
    the next independence query raises :class:`~latentpag.independence.RunTimeout`.
    """
    start = time.perf_counter()
    base_count = ci.n_tests
    cached = CachedCi(ci, deadline)
    report = RunReport(_algorithm_name(cfg), MixedGraph(ci.vertex_count), SepsetStore())

    c2, sep = _steps_one_two(cached, cfg, report)
    report.max_pds = _PdsTable(c2, cfg.pds_mode).max_sizes()
    c3, sep, triples = final_skeleton(c2, sep, cached, cfg)

    report.v_structures["step4_candidates"] = _count_v_structures(sep, triples)
    ambiguous: list[Triple] = []
    if cfg.conservative is Conservative.STEP2_AND_4:
        c4, colliders, ambiguous = _conservative_orientation(c3, cached, sep, triples)
        report.v_structures["step4"] = len(colliders)
        report.ambiguous_triples = ambiguous
    else:
        c4 = orient_v_structures(c3, sep, triples)
        report.v_structures["step4"] = report.v_structures["step4_candidates"]

    st = OrientationState(c4, sep, ambiguous)
    run_rules(st)

    report.graph = c4
    report.sepsets = sep
    report.n_queries = cached.n_tests
    report.n_tests = ci.n_tests - base_count
    report.max_cond_size = cached.max_cond_size
    report.assumed_dependent = getattr(ci, "n_assumed_dependent", 0)
    report.wall_time = time.perf_counter() - start
    return report
