"""Small hand-built latent DAGs with known outputs, used by tests and the CLI docs."""

from __future__ import annotations

from dataclasses import dataclass

from .graph import ARROW, CIRCLE, TAIL, LatentDag, MixedGraph

_LEFT = {"o": CIRCLE, "<": ARROW, "-": TAIL}
_RIGHT = {"o": CIRCLE, ">": ARROW, "-": TAIL}


@dataclass(frozen=True)
class Fixture:
    dag: LatentDag
    names: tuple[str, ...]  # names of observed variables, in index order

    def index(self, name: str) -> int:
        return self.names.index(name)

    def pag(self, edges: str) -> MixedGraph:
        return parse_pag(edges, self.names)


def parse_pag(edges: str, names) -> MixedGraph:
    """Build a graph from lines such as ``"X1 o-> X2"`` or ``"X2 <-> X3"``."""
    names = list(names)
    g = MixedGraph(len(names))
    for item in edges.replace(";", "\n").splitlines():
        item = item.strip()
        if not item:
            continue
        a, edge, b = item.split()
        g.add_edge(names.index(a), names.index(b), _LEFT[edge[0]], _RIGHT[edge[-1]])
    return g


def _build(observed: list[str], latent: list[str], edges: str) -> Fixture:
    names = observed + latent
    pairs = []
    for item in edges.split(","):
        a, b = item.split("->")
        pairs.append((names.index(a.strip()), names.index(b.strip())))
    dag = LatentDag.from_edges(len(names), pairs, latent=range(len(observed), len(names)))
    return Fixture(dag, tuple(observed))


def _bidirected(pairs: str) -> tuple[list[str], str]:
    latents, edges = [], []
    for item in pairs.split(","):
        a, b = item.split("<->")
        name = f"L_{a.strip()}{b.strip()}"
        latents.append(name)
        edges += [f"{name}->{a.strip()}", f"{name}->{b.strip()}"]
    return latents, ",".join(edges)


def latent_collider() -> Fixture:
    """Two latent common causes meeting at X2."""
    return _build(["X1", "X2", "X3"], ["L1", "L2"], "L1->X1, L1->X2, L2->X2, L2->X3")


LATENT_COLLIDER_PAG = "X1 o-> X2; X3 o-> X2"


def five_variables() -> Fixture:
    """X1 and X5 are separated only by a set outside both adjacency sets."""
    return _build(
        ["X1", "X2", "X3", "X4", "X5"],
        ["L1", "L2"],
        "X3->X2, X3->X4, L1->X2, L1->X1, L2->X4, L2->X5, X2->X5, X4->X1",
    )


def six_variables() -> Fixture:
    """The five-variable graph plus a common child X6 of X2, X3, X4 and X5."""
    return _build(
        ["X1", "X2", "X3", "X4", "X5", "X6"],
        ["L1", "L2"],
        "X3->X2, X3->X4, L1->X2, L1->X1, L2->X4, L2->X5, X2->X5, X4->X1, "
        "X3->X6, X2->X6, X4->X6, X5->X6",
    )


def five_variables_confounded() -> Fixture:
    """The five-variable graph with an extra latent common cause of X1 and X5."""
    return _build(
        ["X1", "X2", "X3", "X4", "X5"],
        ["L1", "L2", "L3"],
        "X3->X2, X3->X4, L1->X2, L1->X1, L2->X4, L2->X5, X2->X5, X4->X1, L3->X1, L3->X5",
    )


SIX_VARIABLES_INITIAL_SKELETON = (
    "X3 o-o X2; X3 o-o X4; X2 o-o X1; X2 o-o X5; X4 o-o X1; X4 o-o X5; "
    "X3 o-o X6; X2 o-o X6; X4 o-o X6; X5 o-o X6; X1 o-o X5"
)
SIX_VARIABLES_PAG = (
    "X3 o-> X2; X3 o-> X4; X2 <-> X1; X2 --> X5; X4 --> X1; X4 <-> X5; "
    "X3 --> X6; X2 --> X6; X4 o-> X6; X5 o-> X6"
)
FIVE_VARIABLES_FCI_PAG = "X3 o-> X2; X3 o-> X4; X2 <-> X1; X2 --> X5; X4 --> X1; X5 <-> X4"
FIVE_VARIABLES_RFCI_PAG = FIVE_VARIABLES_FCI_PAG + "; X5 <-> X1"


def minimal_sepset_trap() -> Fixture:
    """A graph where storing a non-minimal sepset would hide the collider at Xj on Xi-Xj-Xk."""
    return _build(
        ["Xa", "Xb", "Xc", "Xd", "Xe", "Xf", "Xg", "Xi", "Xj", "Xk", "Xl"],
        ["L1", "L2", "L3", "L4"],
        "Xg->Xl, Xc->Xa, Xc->Xb, Xc->Xl, Xf->Xi, Xf->Xl, Xi->Xg, Xa->Xk, Xa->Xl, "
        "Xe->Xf, Xe->Xd, Xe->Xl, Xd->Xj, Xd->Xl, Xj->Xg, Xj->Xl, Xk->Xj, Xk->Xl, "
        "Xb->Xi, Xb->Xl, L1->Xi, L1->Xa, L2->Xi, L2->Xd, L3->Xk, L3->Xb, L4->Xf, L4->Xj",
    )


def discriminating_path_trap() -> Fixture:
    """A graph where testing only the full sepset along a discriminating path would orient Xb -> Xp."""
    latents, confounding = _bidirected(
        "Xa<->Xb, Xb<->Xp, Xa<->Xp, Xf<->Xl, Xg<->Xj, Xj<->Xk, Xk<->Xl, Xl<->Xc, Xp<->Xe, Xc<->Xd"
    )
    return _build(
        ["Xa", "Xb", "Xc", "Xd", "Xe", "Xf", "Xg", "Xi", "Xj", "Xk", "Xl", "Xp"],
        latents,
        "Xb->Xl, Xb->Xd, Xg->Xb, Xa->Xl, Xa->Xj, Xf->Xa, Xf->Xp, Xf->Xg, Xg->Xl, Xg->Xp, "
        "Xj->Xl, Xj->Xp, Xj->Xc, Xk->Xp, Xi->Xj, Xc->Xp, Xd->Xe, Xe->Xl, Xd->Xl, " + confounding,
    )
