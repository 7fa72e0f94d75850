"""Compressed-adjacency graphs, edge-list ingestion and BFS utilities."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Iterable, TextIO

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import GraphParseError, GraphTooSmallError, UsageError

log = logging.getLogger(__name__)

NONE = -1
_MAX_ID = 2**64 - 1


def _frozen(a, dtype):
    a = np.ascontiguousarray(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple connected graph in CSR form.

    ``neighbors[offsets[u]:offsets[u + 1]]`` lists the neighbours of ``u`` in
    ascending order.
    """

    n: int
    m: int
    offsets: np.ndarray
    neighbors: np.ndarray
    degrees: np.ndarray

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]], n: int | None = None) -> "Graph":
        """Build from internal 0-based edges. Duplicates and self-loops are dropped.

        The result must be connected with at least two nodes; use
        :func:`parse_edge_list` when the input may be disconnected.
        """
        arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if n is None:
            n = int(arr.max()) + 1 if arr.size else 0
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise UsageError("edge endpoint out of range")
        g = _build(n, arr)
        if g.n < 2:
            raise GraphTooSmallError("graph too small: need at least 2 nodes")
        if not is_connected(g):
            raise UsageError("graph is not connected")
        return g

    def neighbors_of(self, u: int) -> np.ndarray:
        return self.neighbors[self.offsets[u]:self.offsets[u + 1]]

    def has_edge(self, u: int, w: int) -> bool:
        nb = self.neighbors_of(u)
        i = np.searchsorted(nb, w)
        return bool(i < nb.size and nb[i] == w)

    def edges(self) -> np.ndarray:
        """Canonical edge array, one ``(u, v)`` row per edge with ``u < v``, sorted."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        keep = src < self.neighbors
        return np.column_stack([src[keep], self.neighbors[keep]])

    def to_edge_list(self) -> str:
        return "".join(f"{u} {w}\n" for u, w in self.edges())

    def laplacian(self) -> np.ndarray:
        lap = np.zeros((self.n, self.n))
        src = np.repeat(np.arange(self.n), self.degrees)
        lap[src, self.neighbors] = -1.0
        lap[np.arange(self.n), np.arange(self.n)] = self.degrees
        return lap

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n == other.n and self.m == other.m
                and np.array_equal(self.offsets, other.offsets)
                and np.array_equal(self.neighbors, other.neighbors))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def _build(n: int, edges: np.ndarray) -> Graph:
    edges = edges[edges[:, 0] != edges[:, 1]]
    lo = np.minimum(edges[:, 0], edges[:, 1])
    hi = np.maximum(edges[:, 0], edges[:, 1])
    und = np.unique(np.column_stack([lo, hi]), axis=0) if edges.size else edges
    src = np.concatenate([und[:, 0], und[:, 1]])
    dst = np.concatenate([und[:, 1], und[:, 0]])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    degrees = np.bincount(src, minlength=n).astype(np.int64)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(degrees, out=offsets[1:])
    return Graph(n=int(n), m=int(len(und)), offsets=_frozen(offsets, np.int64),
                 neighbors=_frozen(dst, np.int64), degrees=_frozen(degrees, np.int64))


def is_connected(g: Graph) -> bool:
    return bool(np.all(bfs_distances(g, 0) >= 0))


def parse_edge_list(stream: TextIO | Iterable[str]) -> tuple[Graph, dict[int, int]]:
    """Parse a SNAP-style edge list and keep its largest connected component.

    Returns the graph and the map from original ids to dense internal ids
    (order-preserving). Dropped node/edge counts are logged.
    """
    pairs = []
    for lineno, line in enumerate(stream, start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        toks = s.split()
        if len(toks) != 2:
            raise GraphParseError(f"expected 2 node ids, got {len(toks)} tokens", lineno)
        try:
            a, b = int(toks[0]), int(toks[1])
        except ValueError:
            raise GraphParseError(f"malformed node id in {s!r}", lineno) from None
        if a < 0 or b < 0 or a > _MAX_ID or b > _MAX_ID:
            raise GraphParseError(f"node id out of range in {s!r}", lineno)
        pairs.append((a, b))

    if not pairs:
        raise GraphTooSmallError("graph too small: no edges")
    ids = np.array(pairs, dtype=object if any(max(p) >= 2**63 for p in pairs) else np.int64)
    uniq, inv = np.unique(ids.ravel(), return_inverse=True)
    local = inv.reshape(-1, 2).astype(np.int64)
    n_all = len(uniq)
    local = local[local[:, 0] != local[:, 1]]
    if len(local) == 0:
        raise GraphTooSmallError("graph too small: only self-loops")

    adj = coo_matrix((np.ones(len(local)), (local[:, 0], local[:, 1])), shape=(n_all, n_all))
    ncomp, labels = connected_components(adj, directed=False)
    sizes = np.bincount(labels)
    # argmax takes the first maximum; labels are assigned in order of the
    # smallest original id, so ties keep the component holding the smallest id.
    best = int(np.argmax(sizes))
    keep_nodes = np.flatnonzero(labels == best)
    if keep_nodes.size < 2:
        raise GraphTooSmallError(f"graph too small: largest component has {keep_nodes.size} node(s)")
    newid = np.full(n_all, -1, dtype=np.int64)
    newid[keep_nodes] = np.arange(keep_nodes.size)
    mask = (newid[local[:, 0]] >= 0)
    g = _build(keep_nodes.size, newid[local[mask]])
    relabel = {int(uniq[k]): i for i, k in enumerate(keep_nodes)}

    if ncomp > 1:
        total_edges = _build(n_all, local).m
        log.warning("reduced to largest connected component: dropped %d node(s), %d edge(s)",
                    n_all - g.n, total_edges - g.m)
    return g, relabel


def read_edge_list(path) -> tuple[Graph, dict[int, int]]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_edge_list(fh)


def select_landmark(g: Graph, policy: str | int = "highest_degree") -> int:
    """Pick the landmark node: highest degree (lowest id wins ties) or an explicit id."""
    if policy in ("highest_degree", "auto"):
        return int(np.argmax(g.degrees))
    if isinstance(policy, (int, np.integer)) and not isinstance(policy, bool):
        if not 0 <= policy < g.n:
            raise UsageError(f"landmark {policy} out of range [0, {g.n})")
        return int(policy)
    raise UsageError(f"unknown landmark policy {policy!r}")


@dataclass(frozen=True, eq=False)
class RootedTree:
    """Parent-link spanning tree; ``parent[root] == NONE``."""

    root: int
    parent: np.ndarray

    @property
    def n(self) -> int:
        return len(self.parent)

    def edge_set(self) -> frozenset:
        return frozenset((min(u, int(p)), max(u, int(p)))
                         for u, p in enumerate(self.parent) if p != NONE)

    def validate(self, g: Graph | None = None) -> None:
        par = self.parent
        if par[self.root] != NONE or np.count_nonzero(par == NONE) != 1:
            raise ValueError("tree must have exactly one root")
        for u in range(self.n):
            w, steps = u, 0
            while w != self.root:
                if g is not None and not g.has_edge(w, int(par[w])):
                    raise ValueError(f"tree edge ({w}, {par[w]}) not in graph")
                w = int(par[w])
                steps += 1
                if steps >= self.n:
                    raise ValueError("parent links contain a cycle")

    def __eq__(self, other):
        if not isinstance(other, RootedTree):
            return NotImplemented
        return self.root == other.root and np.array_equal(self.parent, other.parent)

    def __hash__(self):
        return hash((self.root, self.parent.tobytes()))


def bfs_tree(g: Graph, root: int) -> RootedTree:
    """Shortest-hop tree; FIFO frontier, neighbours scanned in ascending id."""
    parent = np.full(g.n, NONE, dtype=np.int64)
    seen = np.zeros(g.n, dtype=bool)
    seen[root] = True
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w in g.neighbors_of(u):
            if not seen[w]:
                seen[w] = True
                parent[w] = u
                queue.append(int(w))
    return RootedTree(root=int(root), parent=parent)


def bfs_distances(g: Graph, source: int) -> np.ndarray:
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in g.neighbors_of(u):
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue.append(int(w))
    return dist


def diameter(g: Graph) -> int:
    """Exact hop diameter by BFS from every node. O(nm); meant for modest graphs."""
    return int(max(bfs_distances(g, s).max() for s in range(g.n)))


def stationary_distribution(g: Graph) -> np.ndarray:
    return g.degrees / (2.0 * g.m)
