"""Simulation harness: random latent DAGs, Gaussian data, metrics and timed runs."""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from statistics import fmean
from typing import Iterable, Sequence

import numpy as np
from scipy.special import ndtri

from .fci import FciConfig, possible_d_sep, run_fci
from .graph import LatentDag, MixedGraph, inducing_path_exists, Reachability
from .independence import DsepOracle, GaussianTester, RunTimeout
from .report import RunReport
from .rfci import run_rfci

THREADS_ENV = "LATENTPAG_THREADS"


def _rng(seed, *stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *stream])))


def random_weighted_dag(p_prime: int, expected_neighbors: float, seed: int) -> tuple[np.ndarray, LatentDag]:
    """Random lower-triangular weight matrix and the DAG it encodes.

    Each entry below the diagonal is an edge with probability
    ``expected_neighbors / (p_prime - 1)``; edge weights are uniform on
    ``[0.1, 1]``. A nonzero ``A[i, j]`` means ``j -> i``.
    """
    if p_prime < 1:
        raise ValueError("p_prime must be positive")
    prob = expected_neighbors / (p_prime - 1) if p_prime > 1 else 0.0
    if not 0.0 <= prob <= 1.0:
        raise ValueError("expected_neighbors must lie in [0, p_prime - 1]")
    rng = _rng(seed, 0)
    mask = rng.random((p_prime, p_prime)) < prob
    weights = rng.uniform(0.1, 1.0, (p_prime, p_prime))
    a = np.tril(np.where(mask, weights, 0.0), -1)
    rows, cols = np.nonzero(a)
    edges = [(int(j), int(i)) for i, j in zip(rows, cols)]
    return a, LatentDag.from_edges(p_prime, edges, weights=a)


def mark_latents(dag: LatentDag, seed: int) -> LatentDag:
    """Tag half (rounded down) of the parentless vertices with two or more children as latent."""
    eligible = [v for v in range(dag.n_vertices) if not dag.parents(v) and len(dag.children(v)) >= 2]
    chosen = _rng(seed, 1).choice(len(eligible), size=len(eligible) // 2, replace=False) if eligible else []
    return dag.with_roles(latent=sorted(eligible[c] for c in chosen))


def covariance_from_weights(a: np.ndarray) -> np.ndarray:
    """Covariance ``(I - A)^-1 (I - A)^-T`` of the linear model with unit noise."""
    a = np.asarray(a, dtype=float)
    if np.any(np.triu(a) != 0):
        raise ValueError("weight matrix must be strictly lower triangular")
    b = np.linalg.inv(np.eye(a.shape[0]) - a)
    return b @ b.T


def observed_covariance(dag: LatentDag, cov: np.ndarray) -> np.ndarray:
    idx = dag.observed
    return cov[np.ix_(idx, idx)]


def sample_gaussian(cov: np.ndarray, n: int, seed: int) -> np.ndarray:
    """``n`` rows drawn from ``N(0, cov)``; normals come from inverse-CDF transformed uniforms."""
    chol = np.linalg.cholesky(np.asarray(cov, dtype=float))
    u = _rng(seed, 2).random((n, chol.shape[0]))
    np.clip(u, 2.0**-53, 1.0 - 2.0**-53, out=u)
    return ndtri(u) @ chol.T


@dataclass(frozen=True)
class PagDiff:
    """Edge and mark disagreement between two graphs.

    An edge present in only one graph counts as two mark differences.
    """

    missing_or_extra_edges: int
    mark_differences: int

    @property
    def identical(self) -> bool:
        return self.missing_or_extra_edges == 0 and self.mark_differences == 0


MARK_CONVENTION = "shared edges: one per differing endpoint; unshared edges: two"


def compare_pags(a: MixedGraph, b: MixedGraph) -> PagDiff:
    ma, mb = a.to_matrix(), b.to_matrix()
    if ma.shape != mb.shape:
        raise ValueError(f"graphs have {ma.shape[0]} and {mb.shape[0]} vertices")
    present_a, present_b = ma != 0, mb != 0
    one_side = np.triu(present_a != present_b)
    both = present_a & present_b
    edges = int(np.count_nonzero(one_side))
    marks = int(np.count_nonzero(both & (ma != mb))) + 2 * edges
    return PagDiff(edges, marks)


class Scenario(Enum):
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"


def scenario_classify(
    dag: LatentDag, i: int, j: int, c1: MixedGraph, c2: MixedGraph, reach: Reachability | None = None
) -> Scenario:
    """Classify an observed pair by inducing paths relative to adjacency and Possible-D-SEP sets.

    ``i`` and ``j`` index observed variables; ``c1`` is the initial
    skeleton and ``c2`` the graph whose Possible-D-SEP sets are searched.
    """
    obs = dag.observed
    reach = reach or Reachability(dag)

    def induced(a, b, pool):
        return inducing_path_exists(dag, obs[a], obs[b], [obs[v] for v in pool] + [obs[a], obs[b]], reach)

    adj_i = [v for v in c1.adjacency(i) if v != j]
    adj_j = [v for v in c1.adjacency(j) if v != i]
    pds_i = [v for v in possible_d_sep(c2, i) if v not in (i, j)]
    pds_j = [v for v in possible_d_sep(c2, j) if v not in (i, j)]
    if induced(i, j, pds_i) and induced(j, i, pds_j):
        return Scenario.S1
    if induced(i, j, adj_i) and induced(j, i, adj_j):
        return Scenario.S2
    return Scenario.S3


def mean_max_pds(reports: Iterable[RunReport | Sequence[int]]) -> float:
    """Mean over runs of the largest per-vertex Possible-D-SEP size."""
    maxima = [max(r.max_pds if isinstance(r, RunReport) else r, default=0) for r in reports]
    if not maxima:
        raise ValueError("no runs to average")
    return fmean(maxima)


@dataclass(frozen=True)
class SimConfig:
    p_prime: int
    expected_neighbors: float = 2.0
    n: int = 1000
    alpha: float = 0.01
    seed: int = 0
    algorithms: tuple[str, ...] = ("rfci", "fci")
    reps: int = 1
    oracle: bool = False
    timeout: float | None = None
    cutoff: int | str | None = None

    def __post_init__(self):
        if self.p_prime > 1 and not 0 < self.expected_neighbors / (self.p_prime - 1) <= 1:
            raise ValueError("need 0 < E(N) / (p' - 1) <= 1")
        if self.n <= 0:
            raise ValueError("n must be positive")
        if self.reps < 0:
            raise ValueError("reps must be non-negative")


@dataclass(frozen=True)
class Replicate:
    """Ground truth and CI source inputs for one simulated data set."""

    dag: LatentDag
    covariance: np.ndarray
    data: np.ndarray | None


def make_replicate(cfg: SimConfig, rep: int) -> Replicate:
    seed = _replicate_seed(cfg.seed, rep)
    a, dag = random_weighted_dag(cfg.p_prime, cfg.expected_neighbors, seed)
    dag = mark_latents(dag, seed)
    cov = observed_covariance(dag, covariance_from_weights(a))
    data = None if cfg.oracle else sample_gaussian(cov, cfg.n, seed)
    return Replicate(dag, cov, data)


def _replicate_seed(seed: int, rep: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(rep)]).generate_state(1, np.uint64)[0])


def run_algorithm(name: str, ci, cutoff=None, deadline: float | None = None) -> RunReport:
    if name == "rfci":
        return run_rfci(ci, deadline=deadline)
    return run_fci(ci, FciConfig.from_name(name, cutoff), deadline=deadline)


@dataclass
class BenchRow:
    algorithm: str
    p_prime: int
    replicate: int
    p: int
    timed_out: bool
    edges: int | None = None
    marks: int | None = None
    max_pds: int | None = None
    n_tests: int | None = None
    equals_truth: bool | None = None
    wall_time: float | None = None
    extra: dict = field(default_factory=dict)


def run_replicate(cfg: SimConfig, rep: int) -> list[BenchRow]:
    """Run every configured algorithm on one replicate and compare with the oracle FCI output."""
    sim = make_replicate(cfg, rep)
    truth = run_fci(DsepOracle(sim.dag)).graph
    p = len(sim.dag.observed)
    rows = []
    for name in cfg.algorithms:
        if cfg.oracle:
            ci = DsepOracle(sim.dag)
        else:
            ci = GaussianTester.from_data(sim.data, cfg.alpha)
        deadline = None if cfg.timeout is None else time.monotonic() + cfg.timeout
        start = time.perf_counter()
        try:
            report = run_algorithm(name, ci, cfg.cutoff, deadline)
        except RunTimeout:
            rows.append(BenchRow(name, cfg.p_prime, rep, p, True, wall_time=time.perf_counter() - start))
            continue
        diff = compare_pags(report.graph, truth)
        rows.append(
            BenchRow(
                name,
                cfg.p_prime,
                rep,
                p,
                False,
                diff.missing_or_extra_edges,
                diff.mark_differences,
                report.max_pds_size if report.max_pds else None,
                report.n_tests,
                diff.identical,
                report.wall_time,
            )
        )
    return rows


def worker_count(requested: int | None = None) -> int:
    limit = os.environ.get(THREADS_ENV)
    n = requested or os.cpu_count() or 1
    if limit:
        n = min(n, max(1, int(limit)))
    return n


def run_bench(cfg: SimConfig, workers: int | None = None) -> list[BenchRow]:
    """All replicates of ``cfg``; rows sorted by (replicate, algorithm order)."""
    workers = min(worker_count(workers), max(cfg.reps, 1))
    reps = range(cfg.reps)
    if workers <= 1:
        chunks = [run_replicate(cfg, r) for r in reps]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(run_replicate, [cfg] * cfg.reps, reps))
    return [row for chunk in chunks for row in chunk]


def completed_replicates(rows: Sequence[BenchRow]) -> set[int]:
    """Replicates in which no algorithm timed out."""
    failed = {r.replicate for r in rows if r.timed_out}
    return {r.replicate for r in rows} - failed


def aggregate(rows: Sequence[BenchRow]) -> list[dict]:
    """Per-algorithm means over replicates that completed for every algorithm."""
    keep = completed_replicates(rows)
    out = []
    for name in dict.fromkeys(r.algorithm for r in rows):
        sel = [r for r in rows if r.algorithm == name and r.replicate in keep]
        pds = [r.max_pds for r in sel if r.max_pds is not None]
        out.append(
            {
                "algorithm": name,
                "runs": len(sel),
                "timed_out": sum(1 for r in rows if r.algorithm == name and r.timed_out),
                "mean_edges": fmean(r.edges for r in sel) if sel else float("nan"),
                "mean_marks": fmean(r.marks for r in sel) if sel else float("nan"),
                "mean_max_pds": fmean(pds) if pds else float("nan"),
                "agreement": fmean(1.0 if r.equals_truth else 0.0 for r in sel) if sel else float("nan"),
            }
        )
    return out
