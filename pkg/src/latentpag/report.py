"""Per-run record shared by all algorithms."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .graph import MixedGraph
from .skeleton import SepsetStore, Triple


@dataclass
class RunReport:
    """Output graph plus the bookkeeping of one algorithm run.

    ``n_tests`` counts independence tests evaluated by the source,
    ``n_queries`` counts queries issued including repeats answered from the
    run's cache. ``max_pds`` holds, per vertex, the size of the largest
    Possible-D-SEP pool searched (empty for algorithms without that step).
    """

    algorithm: str
    graph: MixedGraph
    sepsets: SepsetStore
    ambiguous_triples: list[Triple] = field(default_factory=list)
    n_tests: int = 0
    n_queries: int = 0
    max_cond_size: int = -1
    max_pds: list[int] = field(default_factory=list)
    wall_time: float = 0.0
    assumed_dependent: int = 0
    v_structures: dict[str, int] = field(default_factory=dict)
    skeleton: MixedGraph | None = None
    pds_graph: MixedGraph | None = None

    @property
    def max_pds_size(self) -> int:
        return max(self.max_pds, default=0)

    def to_dict(self, include_timing: bool = False) -> dict[str, Any]:
        out: dict[str, Any] = {
            "algorithm": self.algorithm,
            "n_vertices": self.graph.n_vertices,
            "n_edges": self.graph.n_edges,
            "pag": self.graph.to_matrix().tolist(),
            "sepsets": [[i, j, list(s)] for (i, j), s in self.sepsets.items()],
            "ambiguous_triples": [list(t) for t in self.ambiguous_triples],
            "n_tests": self.n_tests,
            "n_queries": self.n_queries,
            "max_cond_size": self.max_cond_size,
            "max_pds": list(self.max_pds),
            "assumed_dependent": self.assumed_dependent,
            "v_structures": dict(sorted(self.v_structures.items())),
        }
        if include_timing:
            out["wall_time"] = self.wall_time
        return out

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_dict(include_timing), sort_keys=True)
