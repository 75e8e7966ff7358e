"""Adjacency-search phase shared by every algorithm: initial skeleton and sepsets."""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Iterator, NamedTuple

from .graph import MixedGraph
from .independence import CiSource

Triple = tuple[int, int, int]


class SepsetStore:
    """Symmetric map from unordered vertex pairs to their recorded separating set.

    ``local_sets`` optionally holds every separating set found among the
    adjacency subsets of a pair (filled by the conservative triple check).
    """

    def __init__(self):
        self._sets: dict[tuple[int, int], tuple[int, ...]] = {}
        self.local_sets: dict[tuple[int, int], list[tuple[int, ...]]] = {}

    @staticmethod
    def _key(i: int, j: int) -> tuple[int, int]:
        return (i, j) if i < j else (j, i)

    def __setitem__(self, pair: tuple[int, int], cond: Iterable[int]) -> None:
        i, j = pair
        cond = tuple(sorted(set(cond)))
        if i == j or i in cond or j in cond:
            raise ValueError(f"sepset for ({i}, {j}) may not contain the pair itself")
        self._sets[self._key(i, j)] = cond

    def __getitem__(self, pair: tuple[int, int]) -> tuple[int, ...]:
        try:
            return self._sets[self._key(*pair)]
        except KeyError:
            raise KeyError(f"no sepset recorded for pair {pair}") from None

    def __contains__(self, pair: tuple[int, int]) -> bool:
        return self._key(*pair) in self._sets

    def __len__(self) -> int:
        return len(self._sets)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(sorted(self._sets))

    def items(self) -> list[tuple[tuple[int, int], tuple[int, ...]]]:
        return sorted(self._sets.items())

    def copy(self) -> "SepsetStore":
        out = SepsetStore()
        out._sets = dict(self._sets)
        out.local_sets = {k: list(v) for k, v in self.local_sets.items()}
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SepsetStore):
            return NotImplemented
        return self._sets == other._sets

    def __repr__(self) -> str:
        return f"SepsetStore({dict(self.items())})"


def unshielded_triples(g: MixedGraph) -> list[Triple]:
    """All ``(i, j, k)`` with ``i - j - k``, ``i < k`` and ``i``, ``k`` non-adjacent, sorted."""
    out = []
    for j in range(g.n_vertices):
        adj = g.adjacency(j)
        for i, k in combinations(adj, 2):
            if not g.is_adjacent(i, k):
                out.append((i, j, k))
    out.sort()
    return out


class SkeletonResult(NamedTuple):
    graph: MixedGraph
    sepsets: SepsetStore
    triples: list[Triple]


def initial_skeleton(ci: CiSource) -> SkeletonResult:
    """Remove edges separated by subsets of current adjacency sets.

    Level ``l`` tests conditioning sets of size ``l``. Adjacency sets are
    taken at the start of each level; ordered pairs are visited
    lexicographically and subsets in combination order.
    """
    p = ci.vertex_count
    g = MixedGraph.complete(p)
    sep = SepsetStore()
    level = 0
    while True:
        adj = [g.adjacency(i) for i in range(p)]
        if not any(len(adj[i]) - 1 >= level for i in range(p) if adj[i]):
            break
        for i in range(p):
            for j in adj[i]:
                if not g.is_adjacent(i, j):
                    continue
                rest = [v for v in adj[i] if v != j]
                if len(rest) < level:
                    continue
                for cond in combinations(rest, level):
                    if ci.independent(i, j, cond):
                        g.remove_edge(i, j)
                        sep[i, j] = cond
                        break
        level += 1
    return SkeletonResult(g, sep, unshielded_triples(g))
