"""Electrical closeness: estimators of the diagonal of the Laplacian pseudo-inverse.

Both estimators ground the Laplacian at a landmark ``v`` and estimate two
vectors: ``x1(u) ~ (L_v^-1)_uu`` and ``x2(u) ~ (1/n) e_u^T L_v^-1 1`` (the
voltage at u when 1/n current enters at every node and leaves at v). They
recombine as ``diag(u) = x1(u) - 2 x2(u) + mean(x2)``.

Per-sample contributions are integers (pass counts, signed edge counts and
subtree sizes), so the reductions are exact and independent of thread count.
"""

from __future__ import annotations

import math
import os
import time
import warnings
from dataclasses import dataclass, field

import numba
import numpy as np
from numba import njit, prange

from .errors import UsageError, WalkLimitError
from .graph import Graph, bfs_tree
from .sampling import (MAX_STEPS, TAG_TREE, TAG_WALK, _order, absorbed_walk_k, randbelow,
                       seed_state, wilson_k)
from .tree_ops import aligned_contributions_k, children_csr, dfs_k, subtree_sums_k

# Old TBB builds make numba warn on every run; prefer OpenMP unless the user chose.
if "NUMBA_THREADING_LAYER_PRIORITY" not in os.environ:
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


def use_threads(threads: int | None) -> int:
    """Set the numba pool size for the next estimator call; returns the chunk count."""
    if threads is None or threads < 1:
        threads = 1
    numba.set_num_threads(min(int(threads), numba.config.NUMBA_NUM_THREADS))
    return int(threads)


def _check_samples(omega):
    if isinstance(omega, bool) or int(omega) != omega or omega < 1:
        raise UsageError(f"sample count must be a positive integer, got {omega!r}")
    return int(omega)


@njit(cache=True)
def spantree_sample_k(offsets, neighbors, v, order, bfs_parent, weight, state, max_steps,
                      nxt, intree, passes, child_off, child_list, vis, fin, pre, stack,
                      cursor, sub, c1, c2):
    """Draw one tree and fill ``c1``/``c2`` with its aligned contributions.

    ``sub`` holds subtree sums of ``weight``. Returns the Wilson step count
    (-1 on overflow).
    """
    steps = wilson_k(offsets, neighbors, v, order, state, nxt, intree, passes, max_steps)
    if steps < 0:
        return steps
    children_csr(nxt, child_off, child_list)
    dfs_k(v, child_off, child_list, vis, fin, pre, stack, cursor)
    subtree_sums_k(nxt, pre, weight, sub)
    aligned_contributions_k(bfs_parent, v, nxt, vis, fin, sub, c1, c2)
    return steps


@njit(parallel=True, cache=True)
def _spantree_counts(offsets, neighbors, v, order, bfs_parent, omega, seed, nchunks,
                     max_steps):
    n = len(offsets) - 1
    acc1 = np.zeros((nchunks, n), dtype=np.int64)
    acc2 = np.zeros((nchunks, n), dtype=np.int64)
    status = np.zeros(nchunks, dtype=np.int64)
    weight = np.ones(n, dtype=np.int64)
    for c in prange(nchunks):
        lo = c * omega // nchunks
        hi = (c + 1) * omega // nchunks
        state = np.empty(4, dtype=np.uint64)
        nxt = np.empty(n, dtype=np.int64)
        intree = np.empty(n, dtype=np.bool_)
        passes = np.zeros(n, dtype=np.int64)
        child_off = np.empty(n + 1, dtype=np.int64)
        child_list = np.empty(n, dtype=np.int64)
        vis = np.empty(n, dtype=np.int64)
        fin = np.empty(n, dtype=np.int64)
        pre = np.empty(n, dtype=np.int64)
        stack = np.empty(n, dtype=np.int64)
        cursor = np.empty(n, dtype=np.int64)
        sub = np.empty(n, dtype=np.int64)
        c1 = np.empty(n, dtype=np.int64)
        c2 = np.empty(n, dtype=np.int64)
        for i in range(lo, hi):
            seed_state(state, seed, i, TAG_TREE)
            if spantree_sample_k(offsets, neighbors, v, order, bfs_parent, weight, state,
                                 max_steps, nxt, intree, passes, child_off, child_list, vis,
                                 fin, pre, stack, cursor, sub, c1, c2) < 0:
                status[c] = 1
                break
            for u in range(n):
                acc1[c, u] += c1[u]
                acc2[c, u] += c2[u]
    tot1 = np.zeros(n, dtype=np.int64)
    tot2 = np.zeros(n, dtype=np.int64)
    for c in range(nchunks):
        for u in range(n):
            tot1[u] += acc1[c, u]
            tot2[u] += acc2[c, u]
    return tot1, tot2, status.max()


@njit(parallel=True, cache=True)
def _lewalk_counts(offsets, neighbors, v, order, omega_tree, omega_walk, seed, nchunks,
                   max_steps):
    n = len(offsets) - 1
    acc1 = np.zeros((nchunks, n), dtype=np.int64)
    acc2 = np.zeros((nchunks, n), dtype=np.int64)
    status = np.zeros(nchunks, dtype=np.int64)
    for c in prange(nchunks):
        state = np.empty(4, dtype=np.uint64)
        nxt = np.empty(n, dtype=np.int64)
        intree = np.empty(n, dtype=np.bool_)
        p1 = acc1[c]
        p2 = acc2[c]
        for i in range(c * omega_tree // nchunks, (c + 1) * omega_tree // nchunks):
            seed_state(state, seed, i, TAG_TREE)
            if wilson_k(offsets, neighbors, v, order, state, nxt, intree, p1, max_steps) < 0:
                status[c] = 1
                break
        for i in range(c * omega_walk // nchunks, (c + 1) * omega_walk // nchunks):
            seed_state(state, seed, i, TAG_WALK)
            s = randbelow(state, n)
            if absorbed_walk_k(offsets, neighbors, v, s, state, p2, max_steps) < 0:
                status[c] = 1
                break
    tot1 = np.zeros(n, dtype=np.int64)
    tot2 = np.zeros(n, dtype=np.int64)
    for c in range(nchunks):
        for u in range(n):
            tot1[u] += acc1[c, u]
            tot2[u] += acc2[c, u]
    return tot1, tot2, status.max()


@dataclass
class EccAccumulator:
    """``first ~ (L_v^-1)_uu`` and ``second ~ (1/n) e_u^T L_v^-1 1``; both zero at v."""

    first: np.ndarray
    second: np.ndarray


@dataclass
class DiagEstimate:
    diag: np.ndarray
    landmark: int
    samples: int
    seed: int
    wall_time: float = 0.0
    method: str = ""
    accumulator: EccAccumulator | None = field(default=None, repr=False)

    @property
    def trace(self) -> float:
        return float(self.diag.sum())

    @property
    def n(self) -> int:
        return len(self.diag)


def recombine(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """Pseudo-inverse diagonal from grounded diagonal and row-sum voltages."""
    return first - 2.0 * second + second.sum() / len(second)


def estimate_spantree(g: Graph, v: int, omega: int, seed: int = 0, threads: int = 1,
                      max_steps: int = MAX_STEPS) -> DiagEstimate:
    """Spanning-tree sampling estimate of diag(L^+).

    Each sample draws a uniform spanning tree, routes 1/n units from every
    node to ``v`` along it, and reads unit and voltage contributions along a
    fixed BFS path from each node.
    """
    omega = _check_samples(omega)
    chunks = use_threads(threads)
    t0 = time.perf_counter()
    bfs = bfs_tree(g, v).parent
    tot1, tot2, bad = _spantree_counts(g.offsets, g.neighbors, v, _order(g, v), bfs, omega,
                                       seed, chunks, max_steps)
    if bad:
        raise WalkLimitError("walk exceeded the step limit; is the graph connected?")
    first = tot1 / omega
    second = tot2 / (float(g.n) * omega)
    diag = recombine(first, second)
    return DiagEstimate(diag=diag, landmark=int(v), samples=omega, seed=seed,
                        wall_time=time.perf_counter() - t0, method="spantree",
                        accumulator=EccAccumulator(first, second))


def estimate_lewalk(g: Graph, v: int, omega: int, seed: int = 0, threads: int = 1,
                    walk_samples: int | None = None,
                    max_steps: int = MAX_STEPS) -> DiagEstimate:
    """Loop-erased-walk estimate of diag(L^+).

    Phase one tallies visits over ``omega`` Wilson runs rooted at ``v``; phase
    two tallies visits of ``walk_samples`` (default ``omega``) walks absorbed at
    ``v`` from uniformly random sources.
    """
    omega = _check_samples(omega)
    walks = omega if walk_samples is None else _check_samples(walk_samples)
    chunks = use_threads(threads)
    t0 = time.perf_counter()
    tot1, tot2, bad = _lewalk_counts(g.offsets, g.neighbors, v, _order(g, v), omega, walks,
                                     seed, chunks, max_steps)
    if bad:
        raise WalkLimitError("walk exceeded the step limit; is the graph connected?")
    first = tot1 / (omega * g.degrees.astype(np.float64))
    second = tot2 / (walks * g.degrees.astype(np.float64))
    diag = recombine(first, second)
    return DiagEstimate(diag=diag, landmark=int(v), samples=omega, seed=seed,
                        wall_time=time.perf_counter() - t0, method="lewalk",
                        accumulator=EccAccumulator(first, second))


def _denominators(diag: np.ndarray) -> tuple[np.ndarray, float]:
    trace = float(diag.sum())
    den = trace + len(diag) * diag
    bad = np.flatnonzero(den <= 0)
    if bad.size:
        warnings.warn(f"nonpositive centrality denominator at node(s) {bad.tolist()}; "
                      "reported as NaN (increase the sample count)", RuntimeWarning,
                      stacklevel=3)
    return den, trace


def ecc_scores(d: DiagEstimate | np.ndarray) -> np.ndarray:
    """c(u) = (n - 1) / (Tr(L^+) + n (L^+)_uu); NaN where the denominator is not positive."""
    diag = np.asarray(d.diag if isinstance(d, DiagEstimate) else d, dtype=np.float64)
    den, _ = _denominators(diag)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0, (len(diag) - 1) / den, np.nan)


def derived_metrics(d: DiagEstimate | np.ndarray) -> tuple[float, np.ndarray]:
    """Kirchhoff index and random-walk betweenness from a diagonal estimate."""
    diag = np.asarray(d.diag if isinstance(d, DiagEstimate) else d, dtype=np.float64)
    n = len(diag)
    den, trace = _denominators(diag)
    with np.errstate(divide="ignore", invalid="ignore"):
        cb = np.where(den > 0, 1.0 / n + trace / ((n - 1) * den), np.nan)
    return trace, cb


def _check_eps_prob(eps, p_fail):
    if not eps > 0:
        raise UsageError(f"eps must be positive, got {eps!r}")
    if not 0 < p_fail < 1:
        raise UsageError(f"p_fail must lie in (0, 1), got {p_fail!r}")


def hoeffding_sample_size_ecc(diameter: int, eps: float, p_fail: float, n: int) -> int:
    """Samples for |error| <= eps at every node with probability >= 1 - p_fail."""
    _check_eps_prob(eps, p_fail)
    if diameter < 1 or n < 2:
        raise UsageError("need diameter >= 1 and n >= 2")
    return math.ceil(32 * diameter**2 * math.log(2 * n / p_fail) / eps**2)
