"""Kemeny's constant estimators.

Both split kappa(G) = Tr((I - P_v)^-1) - (1/2m) d_v^T L_v^-1 d_v and estimate
the two parts separately; :class:`KcEstimate` reports them alongside kappa.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .ecc import _check_samples, _check_eps_prob, spantree_sample_k, use_threads
from .errors import UsageError, WalkLimitError
from .graph import Graph, bfs_tree
from .sampling import (MAX_STEPS, TAG_TREE, TAG_WALK, _order, absorbed_walk_k, seed_state,
                       stationary_node_k, wilson_k)


@njit(parallel=True, cache=True)
def _spantree_parts(offsets, neighbors, v, order, bfs_parent, omega, seed, nchunks,
                    max_steps):
    # Per sample: X1 = sum_u d_u c1(u); X2 = sum_u d_u c2(u) with c2 built on
    # subtree degree sums, so the weighted part is X2 / 2m.
    n = len(offsets) - 1
    deg = np.empty(n, dtype=np.int64)
    for u in range(n):
        deg[u] = offsets[u + 1] - offsets[u]
    x1 = np.zeros(omega, dtype=np.int64)
    x2 = np.zeros(omega, dtype=np.int64)
    status = np.zeros(nchunks, dtype=np.int64)
    for c in prange(nchunks):
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
        for i in range(c * omega // nchunks, (c + 1) * omega // nchunks):
            seed_state(state, seed, i, TAG_TREE)
            if spantree_sample_k(offsets, neighbors, v, order, bfs_parent, deg, state,
                                 max_steps, nxt, intree, passes, child_off, child_list, vis,
                                 fin, pre, stack, cursor, sub, c1, c2) < 0:
                status[c] = 1
                break
            a = 0
            b = 0
            for u in range(n):
                a += deg[u] * c1[u]
                b += deg[u] * c2[u]
            x1[i] = a
            x2[i] = b
    return x1, x2, status.max()


@njit(parallel=True, cache=True)
def _lewalk_lengths(offsets, neighbors, v, order, omega, seed, nchunks, max_steps,
                    with_walks):
    n = len(offsets) - 1
    y1 = np.zeros(omega, dtype=np.int64)
    y2 = np.zeros(omega, dtype=np.int64)
    status = np.zeros(nchunks, dtype=np.int64)
    for c in prange(nchunks):
        state = np.empty(4, dtype=np.uint64)
        nxt = np.empty(n, dtype=np.int64)
        intree = np.empty(n, dtype=np.bool_)
        passes = np.zeros(n, dtype=np.int64)
        for i in range(c * omega // nchunks, (c + 1) * omega // nchunks):
            seed_state(state, seed, i, TAG_TREE)
            steps = wilson_k(offsets, neighbors, v, order, state, nxt, intree, passes,
                             max_steps)
            if steps < 0:
                status[c] = 1
                break
            y1[i] = steps
            if with_walks:
                seed_state(state, seed, i, TAG_WALK)
                s = stationary_node_k(offsets, state)
                steps = absorbed_walk_k(offsets, neighbors, v, s, state, passes, max_steps)
                if steps < 0:
                    status[c] = 1
                    break
                y2[i] = steps
    return y1, y2, status.max()


@dataclass
class KcEstimate:
    kappa: float
    part_trace: float
    part_weighted: float
    landmark: int
    samples: int
    seed: int
    wall_time: float = 0.0
    method: str = ""
    variance: float = float("nan")
    """Empirical variance of the per-sample kappa increments."""

    @property
    def stderr(self) -> float:
        return math.sqrt(self.variance / self.samples) if self.samples > 1 else float("nan")


def _finish(p1: np.ndarray, p2: np.ndarray, scale2: float, v, omega, seed, t0, method):
    # Integer sums first: exact, so independent of how samples were chunked.
    part_trace = int(p1.sum()) / omega
    part_weighted = int(p2.sum()) / (scale2 * omega)
    inc = p1 - p2 / scale2
    var = float(inc.var(ddof=1)) if omega > 1 else float("nan")
    return KcEstimate(kappa=part_trace - part_weighted, part_trace=part_trace,
                      part_weighted=part_weighted, landmark=int(v), samples=omega, seed=seed,
                      wall_time=time.perf_counter() - t0, method=method, variance=var)


def estimate_kc_spantree(g: Graph, v: int, omega: int, seed: int = 0, threads: int = 1,
                         max_steps: int = MAX_STEPS) -> KcEstimate:
    """Spanning-tree estimate: degree-weighted grounded diagonal minus the
    degree-weighted voltage sum of the d_u/2m injection pattern."""
    omega = _check_samples(omega)
    chunks = use_threads(threads)
    t0 = time.perf_counter()
    bfs = bfs_tree(g, v).parent
    x1, x2, bad = _spantree_parts(g.offsets, g.neighbors, v, _order(g, v), bfs, omega, seed,
                                  chunks, max_steps)
    if bad:
        raise WalkLimitError("walk exceeded the step limit; is the graph connected?")
    return _finish(x1, x2, 2.0 * g.m, v, omega, seed, t0, "spantree")


def estimate_kc_lewalk(g: Graph, v: int, omega: int, seed: int = 0, threads: int = 1,
                       max_steps: int = MAX_STEPS) -> KcEstimate:
    """Loop-erased-walk estimate: Wilson run length minus the length of a walk
    absorbed at ``v`` from a stationary-distributed source, averaged."""
    omega = _check_samples(omega)
    chunks = use_threads(threads)
    t0 = time.perf_counter()
    y1, y2, bad = _lewalk_lengths(g.offsets, g.neighbors, v, _order(g, v), omega, seed,
                                  chunks, max_steps, True)
    if bad:
        raise WalkLimitError("walk exceeded the step limit; is the graph connected?")
    return _finish(y1, y2, 1.0, v, omega, seed, t0, "lewalk")


def wilson_run_lengths(g: Graph, v: int, omega: int, seed: int = 0, threads: int = 1,
                       max_steps: int = MAX_STEPS) -> np.ndarray:
    """Total step counts of ``omega`` Wilson runs; their mean estimates Tr((I - P_v)^-1)."""
    omega = _check_samples(omega)
    chunks = use_threads(threads)
    y1, _, bad = _lewalk_lengths(g.offsets, g.neighbors, v, _order(g, v), omega, seed, chunks,
                                 max_steps, False)
    if bad:
        raise WalkLimitError("walk exceeded the step limit; is the graph connected?")
    return y1


def hoeffding_sample_size_kc(m: int, diameter: int, eps: float, p_fail: float) -> int:
    _check_eps_prob(eps, p_fail)
    if m < 1 or diameter < 1:
        raise UsageError("need m >= 1 and diameter >= 1")
    return math.ceil(8 * m**2 * diameter**2 * math.log(2 / p_fail) / eps**2)
