"""Conditional-independence sources: a d-separation oracle and a Gaussian tester."""

from __future__ import annotations

import math
import threading
import time
from statistics import NormalDist
from typing import Iterable

import numpy as np

from .graph import LatentDag, Reachability, Role


class CiError(ValueError):
    """Invalid conditional-independence query."""


class DegenerateModelError(CiError):
    """The covariance submatrix for a query is singular."""

    def __init__(self, i: int, j: int, cond: tuple[int, ...]):
        super().__init__(f"singular covariance submatrix for pair ({i}, {j}) given {list(cond)}")
        self.pair = (i, j)
        self.cond = cond


class ConditioningSetTooLarge(CiError):
    """The sample size is too small for the requested conditioning set."""


class RunTimeout(RuntimeError):
    """The wall-clock budget of a run was exhausted."""


class CiSource:
    """Answers "is ``i`` independent of ``j`` given ``cond``?" for ``vertex_count`` variables.

    Subclasses implement :meth:`_independent`; the public entry point
    validates the query and maintains the test counter.
    """

    def __init__(self, vertex_count: int):
        self.vertex_count = vertex_count
        self._count = 0
        self._lock = threading.Lock()

    @property
    def n_tests(self) -> int:
        return self._count

    def independent(self, i: int, j: int, cond: Iterable[int] = ()) -> bool:
        cond = tuple(sorted(set(cond)))
        p = self.vertex_count
        for v in (i, j, *cond):
            if not 0 <= v < p:
                raise CiError(f"vertex {v} out of range for {p} variables")
        if i == j or i in cond or j in cond:
            raise CiError(f"overlapping query ({i}, {j} | {list(cond)})")
        with self._lock:
            self._count += 1
        if i > j:
            i, j = j, i
        return self._independent(i, j, cond)

    def _independent(self, i: int, j: int, cond: tuple[int, ...]) -> bool:
        raise NotImplementedError


class DsepOracle(CiSource):
    """Exact independence via d-separation in a latent DAG.

    Variable ``k`` is the ``k``-th observed vertex of the DAG; the selection
    set is always added to the conditioning set.
    """

    def __init__(self, dag: LatentDag):
        self.dag = dag
        self.observed = dag.observed
        self._selection = frozenset(dag.selection)
        self._reach = Reachability(dag)
        super().__init__(len(self.observed))

    def dag_vertex(self, k: int) -> int:
        return self.observed[k]

    def _independent(self, i, j, cond):
        obs = self.observed
        z = {obs[v] for v in cond} | self._selection
        return not self._reach.connected(obs[i], obs[j], z)


def dsep_independent(o: DsepOracle, i: int, j: int, cond: Iterable[int] = ()) -> bool:
    return o.independent(i, j, cond)


def dsep_independent_dag(dag: LatentDag, i: int, j: int, cond: Iterable[int] = ()) -> bool:
    """Same as :func:`dsep_independent` but indexed by DAG vertices."""
    for v in (i, j, *cond):
        if dag.roles[v] is not Role.OBSERVED:
            raise CiError(f"vertex {v} is {dag.roles[v].value}; only observed vertices may be queried")
    z = set(cond) | set(dag.selection)
    return not Reachability(dag).connected(i, j, z)


_RHO_LIMIT = 1.0 - 1e-12


def partial_correlation(cov: np.ndarray, i: int, j: int, cond: Iterable[int] = ()) -> float:
    """Partial correlation of ``i`` and ``j`` given ``cond`` from a covariance matrix."""
    cond = tuple(cond)
    if i in cond or j in cond or i == j:
        raise CiError("endpoints must be distinct and outside the conditioning set")
    idx = [i, j, *cond]
    sub = np.asarray(cov, dtype=float)[np.ix_(idx, idx)]
    if len(idx) == 2:
        denom = sub[0, 0] * sub[1, 1]
        if denom <= 0:
            raise DegenerateModelError(i, j, cond)
        return float(sub[0, 1] / math.sqrt(denom))
    try:
        chol = np.linalg.cholesky(sub)
    except np.linalg.LinAlgError:
        raise DegenerateModelError(i, j, cond) from None
    # squared Cholesky diagonal = conditional variances; relative collapse means singular
    if np.any(np.diag(chol) ** 2 < 1e-12 * np.diag(sub)):
        raise DegenerateModelError(i, j, cond)
    prec = np.linalg.inv(sub)
    denom = prec[0, 0] * prec[1, 1]
    if denom <= 0:
        raise DegenerateModelError(i, j, cond)
    return float(-prec[0, 1] / math.sqrt(denom))


def fisher_z(rho: float) -> float:
    rho = min(max(rho, -_RHO_LIMIT), _RHO_LIMIT)
    return 0.5 * math.log((1.0 + rho) / (1.0 - rho))


class GaussianTester(CiSource):
    """Fisher-z test of zero partial correlation.

    Parameters
    ----------
    cov : array
        Covariance (or correlation) matrix of the variables.
    n : int
        Sample size the covariance was estimated from.
    alpha : float
        Significance level; a pair is judged independent when the test does
        not reject at this level.
    assume_dependent_when_small : bool
        When the sample is too small for a conditioning set, answer
        "dependent" instead of raising. Such answers are counted in
        ``n_assumed_dependent``.
    """

    def __init__(self, cov, n: int, alpha: float = 0.01, assume_dependent_when_small: bool = False):
        cov = np.array(cov, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
            raise CiError("covariance must be a square matrix")
        if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-10):
            raise CiError("covariance must be symmetric")
        if np.any(np.diag(cov) <= 0):
            raise CiError("covariance diagonal must be strictly positive")
        if not 0.0 < alpha < 1.0:
            raise CiError("alpha must lie in (0, 1)")
        if n <= 0:
            raise CiError("sample size must be positive")
        super().__init__(cov.shape[0])
        d = np.sqrt(np.diag(cov))
        self.cov = cov
        self._corr = cov / np.outer(d, d)
        self.n = int(n)
        self.alpha = float(alpha)
        # upper quantile via the lower tail keeps full precision for tiny alpha
        self.threshold = -NormalDist().inv_cdf(alpha / 2.0)
        self.assume_dependent_when_small = assume_dependent_when_small
        self.n_assumed_dependent = 0

    @classmethod
    def from_data(cls, data, alpha: float = 0.01, **kwargs) -> "GaussianTester":
        data = np.asarray(data, dtype=float)
        if data.ndim != 2 or data.shape[0] < 2:
            raise CiError("data must be an n x p matrix with n >= 2")
        return cls(np.cov(data, rowvar=False, ddof=1).reshape(data.shape[1], data.shape[1]), data.shape[0], alpha, **kwargs)

    def statistic(self, i: int, j: int, cond: Iterable[int] = ()) -> float:
        """The scaled statistic ``|z| * sqrt(n - |cond| - 3)``."""
        cond = tuple(cond)
        dof = self.n - len(cond) - 3
        if dof <= 0:
            raise ConditioningSetTooLarge(
                f"n={self.n} is too small for a conditioning set of size {len(cond)}"
            )
        rho = partial_correlation(self._corr, i, j, cond)
        return abs(fisher_z(rho)) * math.sqrt(dof)

    def _independent(self, i, j, cond):
        if self.n - len(cond) - 3 <= 0 and self.assume_dependent_when_small:
            with self._lock:
                self.n_assumed_dependent += 1
            return False
        return self.statistic(i, j, cond) <= self.threshold


def fisher_z_independent(t: GaussianTester, i: int, j: int, cond: Iterable[int] = ()) -> bool:
    return t.independent(i, j, cond)


class CachedCi(CiSource):
    """Memoising wrapper with an optional wall-clock deadline.

    ``n_tests`` counts every query; ``source.n_tests`` only grows on cache
    misses.
    """

    def __init__(self, source: CiSource, deadline: float | None = None):
        super().__init__(source.vertex_count)
        self.source = source
        self.deadline = deadline
        self.max_cond_size = -1
        self._cache: dict[tuple, bool] = {}

    def _independent(self, i, j, cond):
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise RunTimeout("run exceeded its time budget")
        key = (i, j, cond)
        hit = self._cache.get(key)
        if hit is None:
            if len(cond) > self.max_cond_size:
                self.max_cond_size = len(cond)
            hit = self.source.independent(i, j, cond)
            self._cache[key] = hit
        return hit
