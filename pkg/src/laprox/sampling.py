"""Seedable random streams and the walk primitives.

All hot loops are numba kernels that take the CSR arrays of a :class:`Graph`
and a 4-word xoshiro256** state. A stream is identified by
``(master_seed, stream_index)``; estimators additionally mix in a phase tag so
different phases of one run never share draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit, uint64

from .errors import WalkLimitError
from .graph import NONE, Graph, RootedTree

MAX_STEPS = 1 << 40
# Phase tags: Wilson runs and standalone absorbed walks draw from disjoint streams.
TAG_TREE = 0
TAG_WALK = 1

_GOLDEN = uint64(0x9E3779B97F4A7C15)
_M1 = uint64(0xBF58476D1CE4E5B9)
_M2 = uint64(0x94D049BB133111EB)
_TAG_SALT = uint64(0xD1B54A32D192ED03)


@njit(inline="always")
def _mix64(z):
    z = (z ^ (z >> uint64(30))) * _M1
    z = (z ^ (z >> uint64(27))) * _M2
    return z ^ (z >> uint64(31))


@njit(inline="always")
def _rotl(x, k):
    return (x << uint64(k)) | (x >> uint64(64 - k))


@njit(cache=True)
def seed_state(state, seed, index, tag):
    """Fill ``state`` from a splitmix64 walk keyed on (seed, index, tag)."""
    h = _mix64(uint64(seed) + _GOLDEN)
    h = _mix64(h ^ (uint64(index) * _GOLDEN + _M1))
    h = _mix64(h ^ (uint64(tag) * _TAG_SALT + _M2))
    for i in range(4):
        h += _GOLDEN
        state[i] = _mix64(h)


@njit(inline="always")
def next_u64(state):
    s0, s1, s2, s3 = state[0], state[1], state[2], state[3]
    result = _rotl(s1 * uint64(5), 7) * uint64(9)
    t = s1 << uint64(17)
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, 45)
    state[0], state[1], state[2], state[3] = s0, s1, s2, s3
    return result


@njit(inline="always")
def next_float(state):
    return float(next_u64(state) >> uint64(11)) * (1.0 / 9007199254740992.0)


@njit(inline="always")
def randbelow(state, k):
    # 53-bit float scaling; bias is below 2**-53 * k.
    return int(next_float(state) * k)


@njit(inline="always")
def random_neighbor_k(offsets, neighbors, u, state):
    d = offsets[u + 1] - offsets[u]
    return neighbors[offsets[u] + randbelow(state, d)]


@njit(inline="always")
def stationary_node_k(offsets, state):
    # Uniform slot in the 2m neighbour array; its owner u has d_u slots.
    slot = randbelow(state, offsets[-1])
    lo, hi = 0, len(offsets) - 1
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if offsets[mid] <= slot:
            lo = mid
        else:
            hi = mid
    return lo


@njit(cache=True)
def wilson_k(offsets, neighbors, v, order, state, nxt, intree, passes, max_steps):
    """One Wilson run rooted at ``v``; tree left in ``nxt``.

    Adds raw visit counts (loops included) to ``passes`` and returns the total
    step count, or -1 when ``max_steps`` is exceeded.
    """
    for i in range(len(nxt)):
        nxt[i] = -1
        intree[i] = False
    intree[v] = True
    steps = 0
    for j in range(len(order)):
        s = order[j]
        u = s
        while not intree[u]:
            passes[u] += 1
            steps += 1
            if steps > max_steps:
                return -1
            nxt[u] = random_neighbor_k(offsets, neighbors, u, state)
            u = nxt[u]
        u = s
        while not intree[u]:
            intree[u] = True
            u = nxt[u]
    return steps


@njit(cache=True)
def absorbed_walk_k(offsets, neighbors, v, s, state, passes, max_steps):
    """Walk from ``s`` until ``v``; counts each visit before stepping. -1 on overflow."""
    u = s
    steps = 0
    while u != v:
        passes[u] += 1
        steps += 1
        if steps > max_steps:
            return -1
        u = random_neighbor_k(offsets, neighbors, u, state)
    return steps


@njit(cache=True)
def _draws(state, k):
    out = np.empty(k, dtype=np.uint64)
    for i in range(k):
        out[i] = next_u64(state)
    return out


@njit(cache=True)
def _wilson_batch(offsets, neighbors, v, order, count, seed, max_steps):
    n = len(offsets) - 1
    parents = np.empty((count, n), dtype=np.int64)
    state = np.empty(4, dtype=np.uint64)
    intree = np.empty(n, dtype=np.bool_)
    passes = np.zeros(n, dtype=np.int64)
    ok = True
    for i in range(count):
        seed_state(state, seed, i, 0)
        if wilson_k(offsets, neighbors, v, order, state, parents[i], intree, passes,
                    max_steps) < 0:
            ok = False
            break
    return parents, ok


def _order(g: Graph, v: int, order: str = "ascending") -> np.ndarray:
    nodes = np.arange(g.n, dtype=np.int64)
    nodes = nodes[nodes != v]
    if order == "descending":
        return nodes[::-1].copy()
    if order != "ascending":
        raise ValueError(f"unknown scan order {order!r}")
    return nodes


class RngStream:
    """Deterministic random stream keyed on ``(master_seed, stream_index)``."""

    __slots__ = ("seed", "index", "state")

    def __init__(self, master_seed: int, stream_index: int = 0, tag: int = 0):
        self.seed = int(master_seed)
        self.index = int(stream_index)
        self.state = np.empty(4, dtype=np.uint64)
        seed_state(self.state, self.seed & (2**64 - 1), self.index & (2**64 - 1), tag)

    def draws(self, k: int) -> np.ndarray:
        """Next ``k`` raw 64-bit outputs."""
        return _draws(self.state, k)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, index={self.index})"


def make_stream(master_seed: int, stream_index: int = 0) -> RngStream:
    return RngStream(master_seed, stream_index)


@dataclass
class WalkTally:
    """Integer visit counts of one or more walks; normalisation by degree on read."""

    counts: np.ndarray
    degrees: np.ndarray
    total_steps: int

    @property
    def normalized_passes(self) -> np.ndarray:
        return self.counts / self.degrees


def random_neighbor(g: Graph, u: int, rng: RngStream) -> int:
    return int(random_neighbor_k(g.offsets, g.neighbors, u, rng.state))


def sample_stationary_node(g: Graph, rng: RngStream) -> int:
    return int(stationary_node_k(g.offsets, rng.state))


def _check(steps: int) -> int:
    if steps < 0:
        raise WalkLimitError("walk exceeded the step limit; is the graph connected?")
    return steps


def wilson_tree(g: Graph, v: int, rng: RngStream, order: str = "ascending",
                max_steps: int = MAX_STEPS) -> RootedTree:
    """Uniform spanning tree rooted at ``v`` (Wilson's algorithm)."""
    return wilson_with_tallies(g, v, rng, order=order, max_steps=max_steps)[0]


def wilson_with_tallies(g: Graph, v: int, rng: RngStream, order: str = "ascending",
                        max_steps: int = MAX_STEPS) -> tuple[RootedTree, WalkTally]:
    """Wilson run that also reports every visit, including erased loops."""
    nxt = np.empty(g.n, dtype=np.int64)
    intree = np.empty(g.n, dtype=np.bool_)
    passes = np.zeros(g.n, dtype=np.int64)
    steps = _check(wilson_k(g.offsets, g.neighbors, v, _order(g, v, order), rng.state,
                            nxt, intree, passes, max_steps))
    nxt[v] = NONE
    return RootedTree(root=int(v), parent=nxt), WalkTally(passes, g.degrees, steps)


def absorbed_walk(g: Graph, v: int, s: int, rng: RngStream,
                  max_steps: int = MAX_STEPS) -> WalkTally:
    """Simple random walk from ``s`` stopped on first arrival at ``v``."""
    passes = np.zeros(g.n, dtype=np.int64)
    steps = _check(absorbed_walk_k(g.offsets, g.neighbors, v, s, rng.state, passes, max_steps))
    return WalkTally(passes, g.degrees, steps)


def sample_spanning_trees(g: Graph, v: int, count: int, seed: int,
                          order: str = "ascending", max_steps: int = MAX_STEPS) -> np.ndarray:
    """``count`` Wilson trees as a (count, n) parent matrix.

    Row ``i`` equals ``wilson_tree(g, v, make_stream(seed, i), order).parent``.
    """
    parents, ok = _wilson_batch(g.offsets, g.neighbors, v, _order(g, v, order), count,
                                seed, max_steps)
    if not ok:
        raise WalkLimitError("walk exceeded the step limit; is the graph connected?")
    return parents
