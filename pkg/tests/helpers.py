"""Shared test utilities that build on the package."""

import numpy as np

from latentpag.graph import LatentDag
from latentpag.independence import CiSource


class TableCi(CiSource):
    """Independent exactly for the listed ``(i, j, cond)`` facts; records every query."""

    def __init__(self, p, facts=()):
        super().__init__(p)
        self.facts = {(min(i, j), max(i, j), frozenset(c)) for i, j, c in facts}
        self.queries = []

    def _independent(self, i, j, cond):
        self.queries.append((i, j, cond))
        return (i, j, frozenset(cond)) in self.facts


class AlwaysIndependent(CiSource):
    def _independent(self, i, j, cond):
        return True


class Recording(CiSource):
    """Wraps another source and logs ``(i, j, cond, answer)`` in issue order."""

    def __init__(self, inner):
        super().__init__(inner.vertex_count)
        self.inner = inner
        self.queries = []

    def _independent(self, i, j, cond):
        answer = self.inner.independent(i, j, cond)
        self.queries.append((i, j, cond, answer))
        return answer


def random_latent_dag(seed, max_vertices=8, with_selection=False, min_vertices=3):
    rng = np.random.default_rng(seed)
    p = int(rng.integers(min_vertices, max_vertices + 1))
    density = rng.uniform(0.2, 0.6)
    edges = [(a, b) for a in range(p) for b in range(a + 1, p) if rng.random() < density]
    perm = rng.permutation(p)
    edges = [(int(perm[a]), int(perm[b])) for a, b in edges]
    roles = rng.choice(3, size=p, p=[0.6, 0.3, 0.1] if with_selection else [0.65, 0.35, 0.0])
    latent = [v for v in range(p) if roles[v] == 1]
    selection = [v for v in range(p) if roles[v] == 2]
    return LatentDag.from_edges(p, edges, latent=latent, selection=selection)


def extend_dag(d, seed, extra=4, prob=0.25, latent_prob=0.4):
    """``d`` plus ``extra`` random vertices wired to existing ones without creating cycles."""
    rng = np.random.default_rng(seed)
    n = d.n_vertices
    rank = {v: float(r) for r, v in enumerate(d.topological_order())}
    for v in range(n, n + extra):
        rank[v] = rng.uniform(-1, n)
    edges = list(d.directed_edges())
    for v in range(n, n + extra):
        for u in range(n + extra):
            if u != v and rng.random() < prob:
                a, b = (u, v) if rank[u] < rank[v] else (v, u)
                if (a, b) not in edges:
                    edges.append((a, b))
    latent = list(d.latent) + [v for v in range(n, n + extra) if rng.random() < latent_prob]
    return LatentDag.from_edges(n + extra, edges, latent=latent)
