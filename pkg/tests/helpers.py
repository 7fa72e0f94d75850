"""Graph fixtures and random generators shared by the test modules."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from laprox.graph import Graph

K2 = [(0, 1)]
P3 = [(0, 1), (1, 2)]
K3 = [(0, 1), (1, 2), (0, 2)]
C4 = [(0, 1), (1, 2), (2, 3), (3, 0)]
DIAMOND = [(0, 1), (1, 2), (2, 3), (3, 0), (1, 3)]
K4 = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
STAR = [(2, 0), (2, 1), (2, 3)]  # K_{1,3} centred at 2

NAMED = {"K2": K2, "P3": P3, "K3": K3, "C4": C4, "diamond": DIAMOND, "K4": K4, "star": STAR}

# Fixed before any estimator was run against them.
ER30 = (30, 0.2, 30)
ER100 = (100, 0.1, 2024)


def graph(name: str) -> Graph:
    return Graph.from_edges(NAMED[name])


def er_graph(n: int, p: float, seed: int | np.random.Generator) -> Graph:
    """G(n, p) resampled until connected."""
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 1)
    while True:
        mask = rng.random(len(iu)) < p
        edges = np.column_stack([iu[mask], ju[mask]])
        if len(edges) >= n - 1 and _connected(n, edges):
            return Graph.from_edges(edges.tolist(), n=n)


def _connected(n, edges) -> bool:
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    adj = coo_matrix((np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(n, n))
    return connected_components(adj, directed=False)[0] == 1


def er_family(count: int, n_lo: int, n_hi: int, seed: int) -> list[Graph]:
    """Random connected ER graphs with n uniform in [n_lo, n_hi] and p = min(1, 2 ln n / n)."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(n_lo, n_hi + 1))
        out.append(er_graph(n, min(1.0, 2 * math.log(n) / n), rng))
    return out


def random_tree_graph(n: int, rng: np.random.Generator) -> Graph:
    """Random recursive tree with shuffled labels."""
    perm = rng.permutation(n)
    edges = [(int(perm[i]), int(perm[rng.integers(0, i)])) for i in range(1, n)]
    return Graph.from_edges(edges, n=n)


def small_test_graphs() -> dict[str, Graph]:
    """Every named fixture plus a few random graphs, all with n <= 64."""
    out = {name: graph(name) for name in NAMED}
    out["ER30"] = er_graph(*ER30)
    for i, g in enumerate(er_family(4, 10, 64, seed=77)):
        out[f"ER-rand{i}"] = g
    out["tree40"] = random_tree_graph(40, np.random.default_rng(40))
    return out


def write_edges(path: Path, g: Graph) -> Path:
    path.write_text(g.to_edge_list())
    return path
