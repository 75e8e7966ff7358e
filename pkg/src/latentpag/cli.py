"""Command-line interface: ``latentpag {fit,oracle,bench,compare}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error,
4 graphs differ (``compare`` only).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .fci import ADAPTIVE
from .independence import CiError, ConditioningSetTooLarge, DegenerateModelError, DsepOracle, GaussianTester
from .io import DataError, default_names, format_pag, read_covariance, read_dag, read_data, read_pag, write_pag
from .simbench import (
    MARK_CONVENTION,
    SimConfig,
    aggregate,
    compare_pags,
    run_algorithm,
    run_bench,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL, EXIT_DIFFER = 0, 1, 2, 3, 4

ALGORITHMS = (
    "fci", "fcipath", "cfci", "cfcipath", "scfci", "scfcipath",
    "aafci", "aafcipath", "caafci", "caafcipath", "scaafci", "scaafcipath", "rfci",
)
BENCH_SCHEMA = 1
RUN_COLUMNS = [
    "p_prime", "replicate", "algorithm", "p", "timed_out",
    "missing_or_extra_edges", "mark_differences", "max_pds", "n_tests", "equals_truth",
]
AGGREGATE_COLUMNS = [
    "p_prime", "algorithm", "runs", "timed_out", "mean_edges", "mean_marks", "mean_max_pds", "agreement",
]
TIMING_COLUMNS = ["p_prime", "replicate", "algorithm", "timed_out", "wall_time"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _cutoff(text: str):
    if text == ADAPTIVE:
        return ADAPTIVE
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'adaptive' or a non-negative integer") from None
    if k < 0:
        raise argparse.ArgumentTypeError("cutoff must be non-negative")
    return k


def _unit_interval(text: str) -> float:
    x = float(text)
    if not 0 < x < 1:
        raise argparse.ArgumentTypeError("must lie strictly between 0 and 1")
    return x


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="latentpag", description="Learn partial ancestral graphs with FCI-family algorithms and RFCI.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    fit = sub.add_parser("fit", help="estimate a PAG from data or a covariance matrix")
    fit.add_argument("input", help="CSV of samples (header of names), or a covariance matrix with --cov")
    fit.add_argument("--cov", action="store_true", help="treat the input as a covariance matrix")
    fit.add_argument("--n", type=int, help="sample size behind the covariance (required with --cov)")
    fit.add_argument("--alg", choices=ALGORITHMS, default="rfci")
    fit.add_argument("--alpha", type=_unit_interval, default=0.01)
    fit.add_argument("--cutoff", type=_cutoff)
    fit.add_argument("--assume-dependent-when-small", action="store_true",
                     help="treat tests with too few samples as dependent instead of failing")
    fit.add_argument("--out", type=Path, help="directory for pag.csv, report.jsonl and timings.jsonl")

    oracle = sub.add_parser("oracle", help="run an algorithm with a d-separation oracle on a DAG file")
    oracle.add_argument("dag", help="DAG file")
    oracle.add_argument("--alg", choices=ALGORITHMS, default="fci")
    oracle.add_argument("--cutoff", type=_cutoff)
    oracle.add_argument("--out", type=Path)

    bench = sub.add_parser("bench", help="simulation benchmark")
    mode = bench.add_mutually_exclusive_group()
    mode.add_argument("--oracle", dest="oracle", action="store_true", help="use the d-separation oracle")
    mode.add_argument("--sample", dest="oracle", action="store_false", help="use Gaussian samples (default)")
    bench.add_argument("--pprime", type=int, nargs="+", required=True)
    bench.add_argument("--en", type=float, default=2.0)
    bench.add_argument("--n", type=int, default=1000)
    bench.add_argument("--alpha", type=_unit_interval, default=0.01)
    bench.add_argument("--reps", type=int, default=1)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--timeout-sec", type=float)
    bench.add_argument("--alg", choices=ALGORITHMS, action="append")
    bench.add_argument("--cutoff", type=_cutoff)
    bench.add_argument("--workers", type=int, help="worker processes (capped by LATENTPAG_THREADS)")
    bench.add_argument("--out", type=Path, help="directory for runs.csv, aggregate.csv, timings.csv, meta.json")

    cmp = sub.add_parser("compare", help="compare two PAG matrix files")
    cmp.add_argument("a")
    cmp.add_argument("b")
    return parser


def _write_run(out: Path | None, report, names, extra: dict) -> None:
    if out is None:
        sys.stdout.write(format_pag(report.graph, names))
        return
    out.mkdir(parents=True, exist_ok=True)
    write_pag(out / "pag.csv", report.graph, names)
    record = {"status": "ok", "names": list(names), **extra, **report.to_dict()}
    (out / "report.jsonl").write_text(json.dumps(record, sort_keys=True) + "\n")
    timing = {"algorithm": report.algorithm, "wall_time": report.wall_time}
    (out / "timings.jsonl").write_text(json.dumps(timing, sort_keys=True) + "\n")


def cmd_fit(args) -> int:
    if args.cov and args.n is None:
        raise UsageError("fit: --n is required with --cov")
    if args.n is not None and args.n <= 0:
        raise UsageError("fit: --n must be positive")
    opts = {"assume_dependent_when_small": args.assume_dependent_when_small}
    if args.cov:
        names, cov = read_covariance(args.input)
        ci = GaussianTester(cov, args.n, args.alpha, **opts)
    else:
        names, data = read_data(args.input)
        ci = GaussianTester.from_data(data, args.alpha, **opts)
    report = run_algorithm(args.alg, ci, args.cutoff)
    extra = {"input": "covariance" if args.cov else "data", "n": ci.n, "alpha": args.alpha}
    _write_run(args.out, report, names, extra)
    return EXIT_OK


def cmd_oracle(args) -> int:
    dag, names = read_dag(args.dag)
    obs = dag.observed
    labels = [names[v] for v in obs] if names is not None else default_names(len(obs))
    report = run_algorithm(args.alg, DsepOracle(dag), args.cutoff)
    _write_run(args.out, report, labels, {"input": "oracle"})
    return EXIT_OK


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return "nan" if math.isnan(x) else repr(x)
    return str(x)


def _csv_text(columns, rows) -> str:
    lines = [",".join(columns)]
    lines += [",".join(_fmt(row[c]) for c in columns) for row in rows]
    return "\n".join(lines) + "\n"


def cmd_bench(args) -> int:
    algorithms = tuple(args.alg) if args.alg else ("rfci", "fci")
    if args.reps < 0:
        raise UsageError("bench: --reps must be non-negative")
    configs = []
    for pp in args.pprime:
        try:
            configs.append(
                SimConfig(pp, args.en, args.n, args.alpha, args.seed, algorithms, args.reps,
                          args.oracle, args.timeout_sec, args.cutoff)
            )
        except ValueError as exc:
            raise UsageError(f"bench: {exc}") from None
    runs, aggs, timings = [], [], []
    for cfg in configs:
        rows = run_bench(cfg, args.workers)
        for r in rows:
            runs.append({
                "p_prime": r.p_prime, "replicate": r.replicate, "algorithm": r.algorithm, "p": r.p,
                "timed_out": r.timed_out, "missing_or_extra_edges": r.edges, "mark_differences": r.marks,
                "max_pds": r.max_pds, "n_tests": r.n_tests, "equals_truth": r.equals_truth,
            })
            timings.append({
                "p_prime": r.p_prime, "replicate": r.replicate, "algorithm": r.algorithm,
                "timed_out": r.timed_out, "wall_time": r.wall_time,
            })
        aggs += [{"p_prime": cfg.p_prime, **a} for a in aggregate(rows)]
    if args.out is None:
        sys.stdout.write(_csv_text(AGGREGATE_COLUMNS, aggs))
        return EXIT_OK
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "runs.csv").write_text(_csv_text(RUN_COLUMNS, runs))
    (args.out / "aggregate.csv").write_text(_csv_text(AGGREGATE_COLUMNS, aggs))
    (args.out / "timings.csv").write_text(_csv_text(TIMING_COLUMNS, timings))
    meta = {
        "schema_version": BENCH_SCHEMA,
        "mark_convention": MARK_CONVENTION,
        "truth": "FCI output under the d-separation oracle",
        "configs": [{**asdict(c), "algorithms": list(c.algorithms)} for c in configs],
    }
    (args.out / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_compare(args) -> int:
    a, _ = read_pag(args.a)
    b, _ = read_pag(args.b)
    if a.n_vertices != b.n_vertices:
        raise DataError(f"graphs have {a.n_vertices} and {b.n_vertices} vertices")
    diff = compare_pags(a, b)
    print(f"missing_or_extra_edges={diff.missing_or_extra_edges} mark_differences={diff.mark_differences}")
    return EXIT_OK if diff.identical else EXIT_DIFFER


COMMANDS = {"fit": cmd_fit, "oracle": cmd_oracle, "bench": cmd_bench, "compare": cmd_compare}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except DegenerateModelError as exc:
        i, j = exc.pair
        print(f"error: singular covariance while testing variables {i} and {j} given {list(exc.cond)}", file=sys.stderr)
        return EXIT_DATA
    except ConditioningSetTooLarge as exc:
        print(f"error: {exc} (see --assume-dependent-when-small)", file=sys.stderr)
        return EXIT_DATA
    except (DataError, CiError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
