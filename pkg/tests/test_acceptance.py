"""Acceptance suite: one marked group of tests per criterion.

Run with ``pytest tests/test_acceptance.py``; the terminal summary prints a
PASS/FAIL line per criterion. ``LATENTPAG_SLOW=1`` enables the large timing run.
"""

import itertools
import json
import os
import statistics
import subprocess
import sys
import time

import networkx as nx
import numpy as np
import pytest

import bruteforce as bf
from helpers import extend_dag, random_latent_dag
from latentpag import fixtures as F
from latentpag.fci import FciConfig, pds_profile, run_fci
from latentpag.graph import ARROW, CIRCLE, TAIL, dag_to_mag, m_separated
from latentpag.independence import CachedCi, DsepOracle, GaussianTester, RunTimeout, partial_correlation
from latentpag.io import write_dag, write_matrix, write_pag
from latentpag.rfci import RfciState, rfci_triple_phase, run_rfci
from latentpag.simbench import (
    Scenario,
    SimConfig,
    compare_pags,
    make_replicate,
    mark_latents,
    mean_max_pds,
    random_weighted_dag,
    run_algorithm,
    scenario_classify,
)
from latentpag.skeleton import initial_skeleton

criterion = pytest.mark.criterion


def _within(start, limit):
    elapsed = time.perf_counter() - start
    assert elapsed <= limit, f"took {elapsed:.1f}s, limit {limit}s"


# 1 -------------------------------------------------------------------------

GOLDEN = criterion(1, "golden fixtures match exactly")


def _timed(fn, *args):
    start = time.perf_counter()
    out = fn(*args)
    _within(start, 1.0)
    return out


@GOLDEN
@pytest.mark.parametrize("algorithm", [run_fci, run_rfci], ids=["fci", "rfci"])
@pytest.mark.parametrize(
    "factory, fci_pag, rfci_pag",
    [
        (F.latent_collider, F.LATENT_COLLIDER_PAG, F.LATENT_COLLIDER_PAG),
        (F.six_variables, F.SIX_VARIABLES_PAG, F.SIX_VARIABLES_PAG),
        (F.five_variables, F.FIVE_VARIABLES_FCI_PAG, F.FIVE_VARIABLES_RFCI_PAG),
        (F.five_variables_confounded, F.FIVE_VARIABLES_RFCI_PAG, F.FIVE_VARIABLES_RFCI_PAG),
    ],
    ids=["latent_collider", "six_variables", "five_variables", "five_variables_confounded"],
)
def test_golden_pag(algorithm, factory, fci_pag, rfci_pag):
    fx = factory()
    expected = fci_pag if algorithm is run_fci else rfci_pag
    assert _timed(algorithm, DsepOracle(fx.dag)).graph == fx.pag(expected)


@GOLDEN
def test_golden_minimal_sepset_trap_keeps_v_structure():
    fx = F.minimal_sepset_trap()
    i, j, k = (fx.index(n) for n in ("Xi", "Xj", "Xk"))
    oracle = DsepOracle(fx.dag)
    g, sep, triples = initial_skeleton(oracle)
    state = _timed(rfci_triple_phase, RfciState(g, sep, list(triples), []), oracle)
    # Xi-Xk goes during the triple phase; the new triple at Xj must become a collider
    assert not state.graph.is_adjacent(i, k) and j not in state.sep[i, k]
    assert state.graph.mark(i, j) == ARROW and state.graph.mark(k, j) == ARROW
    # later steps may drop Xi-Xj, but never claim Xj is an ancestor of Xi or Xk
    final = _timed(run_rfci, oracle).graph
    for x in (i, k):
        assert not final.is_adjacent(x, j) or final.mark(x, j) != TAIL


@GOLDEN
def test_golden_discriminating_path_trap():
    fx = F.discriminating_path_trap()
    j, b, p = (fx.index(n) for n in ("Xj", "Xb", "Xp"))
    g = _timed(run_rfci, DsepOracle(fx.dag)).graph
    assert not g.is_adjacent(j, b)
    assert not (g.mark(p, b) == TAIL and g.mark(b, p) == ARROW)


# 2 -------------------------------------------------------------------------


def _random_sim_dag(seed, max_p_prime=12):
    p_prime = 3 + seed % (max_p_prime - 2)
    _, dag = random_weighted_dag(p_prime, 2.0, seed)
    return mark_latents(dag, seed)


@criterion(2, "oracle FCI variants agree exactly on 300 random graphs")
def test_oracle_variant_equivalence():
    start = time.perf_counter()
    variants = ["fcipath", "cfci", "cfcipath", "scfci", "scfcipath"]
    for seed in range(300):
        dag = _random_sim_dag(seed)
        oracle = CachedCi(DsepOracle(dag))
        ref = run_fci(oracle).graph
        for name in variants:
            assert run_fci(oracle, FciConfig.from_name(name)).graph == ref, (seed, name)
        p = len(dag.observed)
        assert run_fci(oracle, FciConfig.from_name("aafci", max(p - 2, 0))).graph == ref, seed
    _within(start, 30)


# 3 -------------------------------------------------------------------------


@criterion(3, "oracle RFCI equals FCI in at least 198 of 200 runs; differences are single S2 edges")
def test_oracle_rfci_fci_agreement():
    start = time.perf_counter()
    cfg = SimConfig(15, 2.0, oracle=True, seed=3, reps=200)
    agree = 0
    for rep in range(cfg.reps):
        sim = make_replicate(cfg, rep)
        oracle = CachedCi(DsepOracle(sim.dag))
        fci, rfci = run_fci(oracle), run_rfci(oracle)
        diff = compare_pags(rfci.graph, fci.graph)
        if diff.identical:
            agree += 1
            continue
        extra = [e for e in rfci.graph.edges() if not fci.graph.is_adjacent(*e)]
        missing = [e for e in fci.graph.edges() if not rfci.graph.is_adjacent(*e)]
        assert len(extra) == 1 and not missing, rep
        i, j = extra[0]
        assert scenario_classify(sim.dag, i, j, fci.skeleton, fci.pds_graph) is Scenario.S2
        assert rfci.graph.mark(i, j) in (CIRCLE, ARROW) and rfci.graph.mark(j, i) in (CIRCLE, ARROW)
    assert agree >= 198
    _within(start, 120)


# 4 -------------------------------------------------------------------------


def _checked_dags(count, max_observed=8):
    seed = 0
    while count:
        dag = random_latent_dag(seed, max_vertices=11, with_selection=seed % 4 == 0)
        seed += 1
        if 2 <= len(dag.observed) <= max_observed:
            count -= 1
            yield dag


class _Truth:
    """Independence facts and ancestor sets of a DAG, computed with networkx."""

    def __init__(self, dag):
        self.obs, self.sel = dag.observed, list(dag.selection)
        self.g = nx.DiGraph()
        self.g.add_nodes_from(range(dag.n_vertices))
        self.g.add_edges_from(dag.directed_edges())
        self.p = len(self.obs)
        self.separating = {}
        for a, b in itertools.combinations(range(self.p), 2):
            rest = [v for v in range(self.p) if v not in (a, b)]
            self.separating[a, b] = [
                set(y) for y in bf.subsets(rest)
                if nx.is_d_separator(self.g, {self.obs[a]}, {self.obs[b]}, {self.obs[v] for v in y} | set(self.sel))
            ]

    def separable_within(self, a, b, pool):
        pool = set(pool)
        return any(y <= pool for y in self.separating[min(a, b), max(a, b)])

    def ancestor_of(self, target, a):
        """Whether observed ``target`` is an ancestor of observed ``a`` or of a selection variable."""
        anc = set()
        for v in [self.obs[a], *self.sel]:
            anc |= nx.ancestors(self.g, v) | {v}
        return self.obs[target] in anc


def _check_common_clauses(truth, g):
    for a, b in itertools.combinations(range(truth.p), 2):
        if not g.is_adjacent(a, b):
            assert truth.separating[a, b], (a, b)
            continue
        for x, y in ((a, b), (b, a)):
            if g.mark(x, y) == ARROW:
                assert not truth.ancestor_of(y, x), (x, y)
            elif g.mark(x, y) == TAIL:
                assert truth.ancestor_of(y, x), (x, y)


@criterion(4, "oracle outputs satisfy the PAG clauses under exhaustive checks")
def test_output_clauses():
    start = time.perf_counter()
    for dag in _checked_dags(300):
        truth = _Truth(dag)
        oracle = CachedCi(DsepOracle(dag))
        fci, rfci = run_fci(oracle).graph, run_rfci(oracle).graph
        _check_common_clauses(truth, fci)
        _check_common_clauses(truth, rfci)
        for a, b in fci.edges():
            assert not truth.separating[min(a, b), max(a, b)]
        for a, b in rfci.edges():
            for x, y in ((a, b), (b, a)):
                assert not truth.separable_within(a, b, set(rfci.adjacency(x)) - {y})
    _within(start, 300)


# 5 -------------------------------------------------------------------------

BRUTE = criterion(5, "brute-force equivalences")


@BRUTE
def test_m_separation_matches_path_enumeration():
    for seed in range(500):
        d = random_latent_dag(seed, with_selection=True)
        graph = d.graph if seed % 2 else dag_to_mag(d)
        m = graph.to_matrix()
        for i, j in itertools.combinations(range(graph.n_vertices), 2):
            paths = bf.simple_paths(m, i, j)
            rest = [v for v in range(graph.n_vertices) if v not in (i, j)]
            for z in bf.subsets(rest, 4):
                expected = not any(bf.path_open(m, path, z) for path in paths)
                assert m_separated(graph, i, j, z) == expected, (seed, i, j, z)


@BRUTE
def test_partial_correlation_matches_recursion():
    rng = np.random.default_rng(5)
    for _ in range(500):
        p = int(rng.integers(3, 9))
        a = rng.normal(size=(p, p))
        cov = a @ a.T + 0.5 * np.eye(p)
        i, j, *rest = rng.permutation(p).tolist()
        cond = rest[: int(rng.integers(0, len(rest) + 1))]
        assert abs(partial_correlation(cov, i, j, cond) - bf.recursive_partial_correlation(cov, i, j, cond)) <= 1e-10


@BRUTE
def test_sepset_replay_and_minimality():
    new_sets = 0
    for seed in range(200):
        base = (F.six_variables, F.five_variables)[seed % 2]().dag
        dag = extend_dag(base, seed) if seed < 100 else random_latent_dag(seed, max_vertices=10)
        oracle = CachedCi(DsepOracle(dag))
        skeleton_sep = initial_skeleton(oracle).sepsets
        for report in (run_fci(oracle), run_rfci(oracle)):
            for (i, j), cond in report.sepsets.items():
                assert not report.graph.is_adjacent(i, j)
                assert oracle.independent(i, j, cond)
        for pair, cond in run_rfci(oracle).sepsets.items():
            if pair in skeleton_sep:
                assert skeleton_sep[pair] == cond
                continue
            new_sets += 1
            assert not any(oracle.independent(*pair, s) for s in bf.subsets(cond, len(cond) - 1))
    assert new_sets >= 10


# 6 -------------------------------------------------------------------------

SAMPLE_SIZES = (10, 20, 30)
SAMPLE_ALGORITHMS = ("rfci", "cfci", "scfci")


@pytest.fixture(scope="module")
def sample_runs():
    """Reports per (p', algorithm) for 50 sample-mode replicates, plus edge errors against the oracle PAG.

    Plain FCI runs only at the smallest size; its Possible-D-SEP search on
    sample skeletons is far too slow at p' 30 for the time limit.
    """
    start = time.perf_counter()
    out = {}
    for pp in SAMPLE_SIZES:
        cfg = SimConfig(pp, 2.0, 1000, 0.01, seed=6, reps=50)
        names = SAMPLE_ALGORITHMS + (("fci",) if pp == SAMPLE_SIZES[0] else ())
        for rep in range(cfg.reps):
            sim = make_replicate(cfg, rep)
            truth = run_fci(DsepOracle(sim.dag)).graph
            for name in names:
                report = run_algorithm(name, GaussianTester.from_data(sim.data, cfg.alpha))
                edges = compare_pags(report.graph, truth).missing_or_extra_edges
                out.setdefault((pp, name), []).append((report, edges))
    return out, time.perf_counter() - start


SAMPLE = criterion(6, "sample-mode sanity at p' 10, 20, 30")


@SAMPLE
def test_sample_runtime(sample_runs):
    assert sample_runs[1] <= 600


@SAMPLE
@pytest.mark.parametrize("name", SAMPLE_ALGORITHMS)
def test_sample_edge_errors_grow_with_size(sample_runs, name):
    means = [statistics.fmean(e for _, e in sample_runs[0][pp, name]) for pp in SAMPLE_SIZES]
    assert all(a < b for a, b in zip(means, means[1:])), means


@SAMPLE
@pytest.mark.parametrize("pp", SAMPLE_SIZES)
def test_sample_rfci_close_to_cfci(sample_runs, pp):
    rfci = statistics.fmean(e for _, e in sample_runs[0][pp, "rfci"])
    cfci = statistics.fmean(e for _, e in sample_runs[0][pp, "cfci"])
    assert abs(rfci - cfci) <= 0.25 * cfci, (rfci, cfci)


@SAMPLE
def test_sample_candidates_are_the_plain_fci_count(sample_runs):
    runs = sample_runs[0]
    pp = SAMPLE_SIZES[0]
    for fci, cons, strict in zip(*(runs[pp, n] for n in ("fci", "cfci", "scfci"))):
        for report, _ in (cons, strict):
            assert report.v_structures["step2_candidates"] == fci[0].v_structures["step2"]


@SAMPLE
def test_sample_conservative_v_structure_counts(sample_runs):
    runs = sample_runs[0]
    for pp in SAMPLE_SIZES:
        for cons, strict in zip(runs[pp, "cfci"], runs[pp, "scfci"]):
            # the candidates are what a non-conservative orientation would produce on the same triples
            for report, _ in (cons, strict):
                vs = report.v_structures
                assert vs["step2"] <= vs["step2_candidates"]
            vs = strict[0].v_structures
            assert vs["step4"] <= vs["step4_candidates"]


# 7 -------------------------------------------------------------------------


@criterion(7, "mean-max-pds ordering CFCI < FCI_path <= FCI at p' 50")
def test_mean_max_pds_ordering():
    cfg = SimConfig(50, 2.0, 1000, 0.01, seed=7, reps=50)
    profiles = {name: [] for name in ("cfci", "fcipath", "fci")}
    for rep in range(cfg.reps):
        data = make_replicate(cfg, rep).data
        for name in profiles:
            ci = GaussianTester.from_data(data, cfg.alpha)
            profiles[name].append(pds_profile(ci, FciConfig.from_name(name)))
    means = {name: mean_max_pds(p) for name, p in profiles.items()}
    assert means["cfci"] < means["fcipath"] <= means["fci"], means


# 8 -------------------------------------------------------------------------


def _timing_medians(p_prime, seeds, budget):
    """Median wall times of RFCI and FCI; FCI runs past ``budget`` count as ``budget``, a lower bound."""
    cfg = SimConfig(p_prime, 3.0, 1000, 0.01, seed=8, reps=seeds)
    rfci_times, fci_times = [], []
    for rep in range(cfg.reps):
        data = make_replicate(cfg, rep).data
        rfci_times.append(run_algorithm("rfci", GaussianTester.from_data(data, cfg.alpha)).wall_time)
        start = time.perf_counter()
        try:
            run_algorithm("fci", GaussianTester.from_data(data, cfg.alpha), deadline=time.monotonic() + budget)
        except RunTimeout:
            pass
        fci_times.append(min(time.perf_counter() - start, budget))
    return statistics.median(rfci_times), statistics.median(fci_times)


@criterion(8, "RFCI median time at most half of FCI at p' 50, E(N) 3")
def test_timing_trend():
    rfci, fci_lower = _timing_medians(50, 20, budget=5.0)
    assert rfci <= 0.5 * fci_lower, (rfci, fci_lower)


@criterion(8, "RFCI median time at most half of FCI at p' 50, E(N) 3")
@pytest.mark.slow
@pytest.mark.skipif(os.environ.get("LATENTPAG_SLOW") != "1", reason="set LATENTPAG_SLOW=1 for the large run")
def test_timing_separation_large():
    # FCI gets a little over ten times the RFCI time of the same replicate; a timeout proves the ratio
    cfg = SimConfig(300, 3.0, 1000, 0.01, seed=8, reps=5)
    ratios = []
    for rep in range(cfg.reps):
        data = make_replicate(cfg, rep).data
        rfci = run_algorithm("rfci", GaussianTester.from_data(data, cfg.alpha)).wall_time
        budget = 10.5 * rfci
        start = time.perf_counter()
        try:
            run_algorithm("fci", GaussianTester.from_data(data, cfg.alpha), deadline=time.monotonic() + budget)
        except RunTimeout:
            pass
        ratios.append(min(time.perf_counter() - start, budget) / rfci)
    assert statistics.median(ratios) >= 10, ratios


# 9 -------------------------------------------------------------------------


def _cli(*argv, hash_seed):
    env = {**os.environ, "PYTHONHASHSEED": str(hash_seed)}
    res = subprocess.run([sys.executable, "-m", "latentpag", *map(str, argv)],
                         capture_output=True, env=env, check=False)
    return res.returncode, res.stdout


def _tree(path):
    return {p.name: p.read_bytes() for p in sorted(path.iterdir()) if not p.name.startswith("timings")}


@pytest.fixture(scope="module")
def cli_inputs(tmp_path_factory):
    root = tmp_path_factory.mktemp("inputs")
    sim = make_replicate(SimConfig(12, 2.0, 500, seed=9), 0)
    names = [f"V{v}" for v in range(sim.covariance.shape[0])]
    write_matrix(root / "data.csv", names, sim.data)
    write_matrix(root / "cov.csv", names, sim.covariance)
    write_dag(root / "six.dag", F.six_variables().dag)
    fx = F.five_variables()
    write_pag(root / "fci.csv", fx.pag(F.FIVE_VARIABLES_FCI_PAG), fx.names)
    write_pag(root / "rfci.csv", fx.pag(F.FIVE_VARIABLES_RFCI_PAG), fx.names)
    return root


DETERMINISM_COMMANDS = {
    "fit_data": ["fit", "{in}/data.csv", "--alg", "fci"],
    "fit_cov": ["fit", "{in}/cov.csv", "--cov", "--n", "500", "--alg", "scfcipath"],
    "fit_rfci": ["fit", "{in}/data.csv"],
    "oracle": ["oracle", "{in}/six.dag", "--alg", "rfci"],
    "bench_oracle": ["bench", "--oracle", "--pprime", "12", "15", "--reps", "4", "--seed", "3"],
    "bench_sample": ["bench", "--pprime", "10", "--reps", "3", "--alg", "rfci", "--alg", "cfci", "--workers", "2"],
    "compare": ["compare", "{in}/fci.csv", "{in}/rfci.csv"],
}


@criterion(9, "repeated commands give byte-identical outputs")
@pytest.mark.parametrize("command", sorted(DETERMINISM_COMMANDS))
def test_determinism(tmp_path, cli_inputs, command):
    argv = [a.replace("{in}", str(cli_inputs)) for a in DETERMINISM_COMMANDS[command]]
    results = []
    for attempt in range(2):
        out = tmp_path / f"run{attempt}"
        code, stdout = _cli(*argv, hash_seed=attempt)
        entry = [code, stdout]
        if command != "compare":
            code_dir, stdout_dir = _cli(*argv, "--out", out, hash_seed=attempt + 10)
            entry += [code_dir, stdout_dir, _tree(out)]
        results.append(entry)
    assert results[0][0] in (0, 4)
    assert results[0] == results[1]
    if command != "compare":
        assert results[0][4]
        meta = results[0][4].get("meta.json")
        if meta is not None:
            assert json.loads(meta)["schema_version"] == 1


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", *sys.argv[1:]]))
