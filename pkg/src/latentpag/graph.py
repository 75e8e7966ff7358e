"""Mixed graphs, latent DAGs and the separation machinery built on them."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Iterable, Sequence

import numpy as np


class EdgeMark(IntEnum):
    """Endpoint mark of an edge. The integer codes double as the file encoding."""

    CIRCLE = 1
    ARROW = 2
    TAIL = 3


CIRCLE = int(EdgeMark.CIRCLE)
ARROW = int(EdgeMark.ARROW)
TAIL = int(EdgeMark.TAIL)

_SYMBOL_AT_LEFT = {CIRCLE: "o", ARROW: "<", TAIL: "-"}
_SYMBOL_AT_RIGHT = {CIRCLE: "o", ARROW: ">", TAIL: "-"}


class GraphError(ValueError):
    """Raised for malformed graphs or invalid vertex arguments."""


class MixedGraph:
    """Simple graph with an endpoint mark stored per ordered pair.

    ``mark(i, j)`` is the mark at ``j`` on the edge between ``i`` and ``j``, or
    ``None`` when the two vertices are not adjacent. Algorithms never mutate a
    graph they receive; they work on a :meth:`copy`.
    """

    __slots__ = ("_m",)

    def __init__(self, n_vertices: int):
        if n_vertices < 0:
            raise GraphError("vertex count must be non-negative")
        self._m = np.zeros((n_vertices, n_vertices), dtype=np.int8)

    @classmethod
    def from_matrix(cls, matrix) -> "MixedGraph":
        m = np.asarray(matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise GraphError("mark matrix must be square")
        if not np.all(np.isin(m, (0, CIRCLE, ARROW, TAIL))):
            raise GraphError("marks must be integers in {0, 1, 2, 3}")
        if np.any(np.diag(m) != 0):
            raise GraphError("self-loops are not allowed")
        if np.any((m == 0) != (m.T == 0)):
            raise GraphError("edge presence must be symmetric")
        g = cls(m.shape[0])
        g._m[:] = m
        return g

    @classmethod
    def complete(cls, n_vertices: int, mark: int = CIRCLE) -> "MixedGraph":
        g = cls(n_vertices)
        g._m[:] = int(mark)
        np.fill_diagonal(g._m, 0)
        return g

    @property
    def n_vertices(self) -> int:
        return self._m.shape[0]

    def _check(self, *vertices: int) -> None:
        p = self._m.shape[0]
        for v in vertices:
            if not 0 <= v < p:
                raise GraphError(f"vertex {v} out of range for {p} vertices")

    def mark(self, i: int, j: int) -> EdgeMark | None:
        self._check(i, j)
        code = int(self._m[i, j])
        return EdgeMark(code) if code else None

    def is_adjacent(self, i: int, j: int) -> bool:
        return bool(self._m[i, j])

    def adjacency(self, i: int) -> list[int]:
        self._check(i)
        return np.flatnonzero(self._m[i]).tolist()

    def add_edge(self, i: int, j: int, mark_at_i: int = CIRCLE, mark_at_j: int = CIRCLE) -> None:
        self._check(i, j)
        if i == j:
            raise GraphError("self-loops are not allowed")
        self._m[j, i] = int(mark_at_i)
        self._m[i, j] = int(mark_at_j)

    def set_mark(self, i: int, j: int, mark: int) -> None:
        """Set the mark at ``j`` on the existing edge between ``i`` and ``j``."""
        if not self._m[i, j]:
            raise GraphError(f"no edge between {i} and {j}")
        self._m[i, j] = int(mark)

    def remove_edge(self, i: int, j: int) -> None:
        self._m[i, j] = 0
        self._m[j, i] = 0

    def edges(self) -> list[tuple[int, int]]:
        """Unordered edges as ``(i, j)`` with ``i < j``, ascending."""
        rows, cols = np.nonzero(np.triu(self._m))
        return list(zip(rows.tolist(), cols.tolist()))

    @property
    def n_edges(self) -> int:
        return int(np.count_nonzero(self._m)) // 2

    def is_directed(self, i: int, j: int) -> bool:
        """True for ``i -> j``."""
        return self._m[i, j] == ARROW and self._m[j, i] == TAIL

    def reset_marks(self, mark: int = CIRCLE) -> None:
        self._m[self._m != 0] = int(mark)

    def copy(self) -> "MixedGraph":
        g = MixedGraph.__new__(MixedGraph)
        g._m = self._m.copy()
        return g

    def to_matrix(self) -> np.ndarray:
        return self._m.astype(np.int64)

    def skeleton_equals(self, other: "MixedGraph") -> bool:
        return np.array_equal(self._m != 0, other._m != 0)

    def edge_string(self, i: int, j: int) -> str:
        if not self._m[i, j]:
            return ""
        return _SYMBOL_AT_LEFT[int(self._m[j, i])] + "-" + _SYMBOL_AT_RIGHT[int(self._m[i, j])]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MixedGraph):
            return NotImplemented
        return np.array_equal(self._m, other._m)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        parts = [f"{i}{self.edge_string(i, j)}{j}" for i, j in self.edges()]
        return f"MixedGraph({self.n_vertices}, [{', '.join(parts)}])"


class Role(Enum):
    OBSERVED = "observed"
    LATENT = "latent"
    SELECTION = "selection"


@dataclass(frozen=True)
class LatentDag:
    """A DAG whose vertices are tagged observed, latent or selection.

    ``weights[i, j]`` (when present) is the coefficient of the edge ``j -> i``.
    """

    graph: MixedGraph
    roles: tuple[Role, ...]
    weights: np.ndarray | None = None

    def __post_init__(self):
        g = self.graph
        if len(self.roles) != g.n_vertices:
            raise GraphError("one role per vertex is required")
        m = g._m
        for i, j in g.edges():
            if not ((m[i, j] == ARROW and m[j, i] == TAIL) or (m[i, j] == TAIL and m[j, i] == ARROW)):
                raise GraphError(f"edge {i}-{j} is not directed")
        if len(self.topological_order()) != g.n_vertices:
            raise GraphError("graph has a directed cycle")

    @classmethod
    def from_edges(
        cls,
        n_vertices: int,
        edges: Iterable[tuple[int, int]],
        latent: Iterable[int] = (),
        selection: Iterable[int] = (),
        weights: np.ndarray | None = None,
    ) -> "LatentDag":
        g = MixedGraph(n_vertices)
        for src, dst in edges:
            if g.is_adjacent(src, dst):
                raise GraphError(f"duplicate edge {src}-{dst}")
            g.add_edge(src, dst, TAIL, ARROW)
        roles = [Role.OBSERVED] * n_vertices
        for v in latent:
            roles[v] = Role.LATENT
        for v in selection:
            roles[v] = Role.SELECTION
        return cls(g, tuple(roles), weights)

    @property
    def n_vertices(self) -> int:
        return self.graph.n_vertices

    def _with_role(self, role: Role) -> list[int]:
        return [v for v, r in enumerate(self.roles) if r is role]

    @property
    def observed(self) -> list[int]:
        return self._with_role(Role.OBSERVED)

    @property
    def latent(self) -> list[int]:
        return self._with_role(Role.LATENT)

    @property
    def selection(self) -> list[int]:
        return self._with_role(Role.SELECTION)

    def parents(self, v: int) -> list[int]:
        m = self.graph._m
        return [u for u in np.flatnonzero(m[v]).tolist() if m[u, v] == ARROW]

    def children(self, v: int) -> list[int]:
        m = self.graph._m
        return [u for u in np.flatnonzero(m[v]).tolist() if m[v, u] == ARROW]

    def directed_edges(self) -> list[tuple[int, int]]:
        return [(i, j) if self.graph.is_directed(i, j) else (j, i) for i, j in self.graph.edges()]

    def topological_order(self) -> list[int]:
        p = self.graph.n_vertices
        indegree = [len(self.parents(v)) for v in range(p)]
        ready = deque(v for v in range(p) if indegree[v] == 0)
        order = []
        while ready:
            v = ready.popleft()
            order.append(v)
            for c in self.children(v):
                indegree[c] -= 1
                if indegree[c] == 0:
                    ready.append(c)
        return order

    def with_roles(self, latent: Iterable[int] = (), selection: Iterable[int] = ()) -> "LatentDag":
        roles = [Role.OBSERVED] * self.n_vertices
        for v in latent:
            roles[v] = Role.LATENT
        for v in selection:
            roles[v] = Role.SELECTION
        return LatentDag(self.graph, tuple(roles), self.weights)


def _as_graph(g: MixedGraph | LatentDag) -> MixedGraph:
    return g.graph if isinstance(g, LatentDag) else g


def adjacency(g: MixedGraph | LatentDag, i: int) -> list[int]:
    """Sorted neighbours of ``i``."""
    return _as_graph(g).adjacency(i)


def _closure(m: np.ndarray, seeds: Iterable[int], upward: bool) -> set[int]:
    out = set(seeds)
    stack = list(out)
    while stack:
        v = stack.pop()
        for u in np.flatnonzero(m[v]).tolist():
            if u in out:
                continue
            # upward: u -> v, i.e. arrow at v and tail at u
            a, b = (u, v) if upward else (v, u)
            if m[a, b] == ARROW and m[b, a] == TAIL:
                out.add(u)
                stack.append(u)
    return out


def ancestors(g: MixedGraph | LatentDag, vertices: Iterable[int]) -> set[int]:
    """All vertices with a directed path into ``vertices``, including themselves."""
    return _closure(_as_graph(g)._m, vertices, upward=True)


def descendants(g: MixedGraph | LatentDag, vertices: Iterable[int]) -> set[int]:
    return _closure(_as_graph(g)._m, vertices, upward=False)


class Reachability:
    """Precomputed neighbour lists for repeated m-separation queries on one graph."""

    def __init__(self, g: MixedGraph | LatentDag):
        m = _as_graph(g)._m
        self.n_vertices = m.shape[0]
        # per vertex v: (w, arrow at w, arrow at v)
        self.nbrs = []
        self.parents = []
        for v in range(self.n_vertices):
            row = []
            pars = []
            for w in np.flatnonzero(m[v]).tolist():
                row.append((w, m[v, w] == ARROW, m[w, v] == ARROW))
                if m[w, v] == ARROW and m[v, w] == TAIL:
                    pars.append(w)
            self.nbrs.append(row)
            self.parents.append(pars)

    def ancestors(self, vertices: Iterable[int]) -> set[int]:
        out = set(vertices)
        stack = list(out)
        while stack:
            for u in self.parents[stack.pop()]:
                if u not in out:
                    out.add(u)
                    stack.append(u)
        return out

    def connected(self, i: int, j: int, z: set[int]) -> bool:
        """True when some path between ``i`` and ``j`` is open given ``z``."""
        anc = self.ancestors(z)
        nbrs = self.nbrs
        seen = set()
        stack = []
        for w, into_w, _ in nbrs[i]:
            if w == j:
                return True
            state = (w, into_w)
            if state not in seen:
                seen.add(state)
                stack.append(state)
        while stack:
            v, into_v = stack.pop()
            in_z = v in z
            in_anc = v in anc
            for w, into_w, arrow_at_v in nbrs[v]:
                if into_v and arrow_at_v:
                    if not in_anc:
                        continue
                elif in_z:
                    continue
                if w == j:
                    return True
                state = (w, into_w)
                if state not in seen:
                    seen.add(state)
                    stack.append(state)
        return False


def _validate_pair(p: int, i: int, j: int, z: Iterable[int]) -> set[int]:
    z = set(z)
    for v in (i, j, *z):
        if not 0 <= v < p:
            raise GraphError(f"vertex {v} out of range for {p} vertices")
    if i == j:
        raise GraphError("endpoints must differ")
    if i in z or j in z:
        raise GraphError("endpoints must not be in the conditioning set")
    return z


def m_separated(g: MixedGraph | LatentDag, i: int, j: int, z: Iterable[int] = ()) -> bool:
    """m-separation of ``i`` and ``j`` given ``z`` (d-separation on a DAG).

    Circle marks count as non-arrowheads.
    """
    graph = _as_graph(g)
    z = _validate_pair(graph.n_vertices, i, j, z)
    return not Reachability(graph).connected(i, j, z)


def _check_observed(d: LatentDag, vertices: Iterable[int]) -> None:
    for v in vertices:
        if not 0 <= v < d.n_vertices:
            raise GraphError(f"vertex {v} out of range")
        if d.roles[v] is not Role.OBSERVED:
            raise GraphError(f"vertex {v} is {d.roles[v].value}, expected observed")


def inducing_path_exists(
    d: LatentDag, i: int, j: int, y: Iterable[int], reach: Reachability | None = None
) -> bool:
    """Whether an inducing path between ``i`` and ``j`` exists relative to ``y``.

    Every member of ``y`` or the selection set lying inside the path must be a
    collider, and every collider must be an ancestor of ``i``, ``j`` or the
    selection set. Such a path exists exactly when ``i`` and ``j`` are
    d-connected given the members of ``y`` and the selection set that are
    ancestors of ``{i, j}`` and the selection set.
    """
    y = set(y)
    _check_observed(d, (i, j, *y))
    if i == j:
        raise GraphError("endpoints must differ")
    reach = reach or Reachability(d)
    sel = set(d.selection)
    anc = reach.ancestors({i, j} | sel)
    z = ((y & anc) | sel) - {i, j}
    return reach.connected(i, j, z)


def dag_to_mag(d: LatentDag) -> MixedGraph:
    """Maximal ancestral graph over the observed vertices of ``d``.

    Vertex ``k`` of the result is the ``k``-th observed vertex of ``d``.
    """
    obs = d.observed
    sel = set(d.selection)
    reach = Reachability(d)
    mag = MixedGraph(len(obs))
    anc_of = {v: reach.ancestors({v} | sel) for v in obs}
    for a in range(len(obs)):
        for b in range(a + 1, len(obs)):
            i, j = obs[a], obs[b]
            if not inducing_path_exists(d, i, j, obs, reach):
                continue
            mark_i = TAIL if i in anc_of[j] else ARROW
            mark_j = TAIL if j in anc_of[i] else ARROW
            mag.add_edge(a, b, mark_i, mark_j)
    return mag


def biconnected_components(g: MixedGraph) -> list[set[tuple[int, int]]]:
    """Edge sets of the maximal biconnected components of the skeleton.

    Edges are ``(i, j)`` with ``i < j``. Components appear in the order the
    depth-first search closes them.
    """
    p = g.n_vertices
    adj = [g.adjacency(v) for v in range(p)]
    disc = [-1] * p
    low = [0] * p
    counter = 0
    components: list[set[tuple[int, int]]] = []
    edge_stack: list[tuple[int, int]] = []

    for root in range(p):
        if disc[root] != -1 or not adj[root]:
            continue
        disc[root] = low[root] = counter
        counter += 1
        stack = [(root, -1, iter(adj[root]))]
        while stack:
            v, parent, it = stack[-1]
            advanced = False
            for w in it:
                if disc[w] == -1:
                    edge_stack.append((v, w))
                    disc[w] = low[w] = counter
                    counter += 1
                    stack.append((w, v, iter(adj[w])))
                    advanced = True
                    break
                if w != parent and disc[w] < disc[v]:
                    edge_stack.append((v, w))
                    low[v] = min(low[v], disc[w])
            if advanced:
                continue
            stack.pop()
            if parent == -1:
                continue
            low[parent] = min(low[parent], low[v])
            if low[v] >= disc[parent]:
                comp = set()
                while True:
                    a, b = edge_stack.pop()
                    comp.add((min(a, b), max(a, b)))
                    if (a, b) == (parent, v):
                        break
                components.append(comp)
    return components


def component_vertices(components: Sequence[set[tuple[int, int]]]) -> dict[tuple[int, int], frozenset[int]]:
    """Map each edge ``(i, j)``, ``i < j``, to the vertex set of its component."""
    out = {}
    for comp in components:
        verts = frozenset(v for e in comp for v in e)
        for e in comp:
            out[e] = verts
    return out


def is_ancestral(g: MixedGraph) -> bool:
    """No directed or almost directed cycle; undirected endpoints have no parents or spouses."""
    m = g._m
    p = g.n_vertices
    for v in range(p):
        below = descendants(g, [v]) - {v}
        for u in g.adjacency(v):
            # u *-> v with v an ancestor of u closes a (almost) directed cycle
            if m[u, v] == ARROW and u in below:
                return False
            if m[u, v] == TAIL and m[v, u] == TAIL:
                for w in g.adjacency(v):
                    if m[w, v] == ARROW:
                        return False
    return True
