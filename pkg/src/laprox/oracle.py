"""Dense ground truth for small graphs.

Grounded inverses via Cholesky, the pseudo-inverses rebuilt from them,
Kemeny's constant two independent ways, and exact spanning-tree counting.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import linalg

from .errors import NumericError, OracleCapError
from .graph import NONE, Graph, RootedTree, bfs_tree, select_landmark
from .tree_ops import path_support, root_path_edges

DEFAULT_CAP = 2048
ENUM_MAX_NODES = 12
ENUM_MAX_TREES = 10**6


def oracle_cap() -> int:
    return int(os.environ.get("LAPROX_ORACLE_CAP", DEFAULT_CAP))


def _guard(g: Graph, cap: int | None):
    cap = oracle_cap() if cap is None else cap
    if g.n > cap:
        raise OracleCapError(f"graph has {g.n} nodes; dense oracle cap is {cap} "
                             "(set LAPROX_ORACLE_CAP to raise it)")


def _others(n: int, v: int) -> np.ndarray:
    idx = np.arange(n)
    return idx[idx != v]


def dense_grounded_inverse(g: Graph, v: int, cap: int | None = None) -> np.ndarray:
    """Inverse of L with row and column ``v`` deleted; rows ordered by node id, v skipped."""
    _guard(g, cap)
    keep = _others(g.n, v)
    lv = g.laplacian()[np.ix_(keep, keep)]
    try:
        factor = linalg.cho_factor(lv, lower=True)
    except linalg.LinAlgError as exc:
        raise NumericError(f"grounded Laplacian is not positive definite: {exc}") from None
    inv = linalg.cho_solve(factor, np.eye(len(keep)))
    inv = 0.5 * (inv + inv.T)
    resid = np.abs(lv @ inv - np.eye(len(keep))).max()
    if resid > 1e-8:
        raise NumericError(f"grounded inverse residual {resid:.3e} exceeds 1e-8")
    return inv


def embed_grounded(g: Graph, v: int, inv: np.ndarray) -> np.ndarray:
    """n x n copy of a grounded inverse with a zero row/column at ``v``."""
    full = np.zeros((g.n, g.n))
    keep = _others(g.n, v)
    full[np.ix_(keep, keep)] = inv
    return full


def pinv_from_grounded(g: Graph, v: int, inv: np.ndarray | None = None) -> np.ndarray:
    """L^+ = B L_v^-1 B^T with B = [I - J/n ; -1^T/n] (rows in node order)."""
    if inv is None:
        inv = dense_grounded_inverse(g, v)
    n = g.n
    b = np.zeros((n, n - 1))
    keep = _others(n, v)
    b[keep] = np.eye(n - 1) - 1.0 / n
    b[v] = -1.0 / n
    return b @ inv @ b.T


def pinv_diag_from_grounded(g: Graph, v: int, inv: np.ndarray | None = None) -> np.ndarray:
    """Diagonal only, by the element-wise identities (no full product)."""
    if inv is None:
        inv = dense_grounded_inverse(g, v)
    n = g.n
    full = embed_grounded(g, v, inv)
    rows = full.sum(axis=1)
    return np.diag(full) - 2.0 * rows / n + rows.sum() / n**2


def pinv_bordered(g: Graph) -> np.ndarray:
    """(L + J/n)^-1 - J/n."""
    j = np.full((g.n, g.n), 1.0 / g.n)
    return np.linalg.inv(g.laplacian() + j) - j


def dense_pinv(g: Graph, v: int | None = None, cap: int | None = None) -> np.ndarray:
    """L^+ from the grounded inverse, cross-checked against the bordered form."""
    _guard(g, cap)
    v = select_landmark(g) if v is None else v
    lp = pinv_from_grounded(g, v, dense_grounded_inverse(g, v, cap=g.n))
    other = pinv_bordered(g)
    gap = np.abs(lp - other).max()
    if gap > 1e-8:
        raise NumericError(f"pseudo-inverse constructions disagree by {gap:.3e}")
    return lp


def normalized_laplacian(g: Graph) -> np.ndarray:
    s = 1.0 / np.sqrt(g.degrees)
    return s[:, None] * g.laplacian() * s[None, :]


def normalized_pinv_from_grounded(g: Graph, v: int, inv: np.ndarray | None = None) -> np.ndarray:
    """Normalized-Laplacian pseudo-inverse entry by entry from L_v^-1."""
    if inv is None:
        inv = dense_grounded_inverse(g, v)
    full = embed_grounded(g, v, inv)
    d = g.degrees.astype(np.float64)
    two_m = 2.0 * g.m
    pi = d / two_m
    rd = full @ d                     # e_s^T L_v^-1 d_v; zero at v
    q = d @ full @ d / two_m          # (1/2m) d_v^T L_v^-1 d_v
    core = two_m * full - rd[:, None] - rd[None, :] + q
    return np.sqrt(np.outer(pi, pi)) * core


def normalized_pinv_eig(g: Graph) -> np.ndarray:
    sig, vec = np.linalg.eigh(normalized_laplacian(g))
    inv = np.zeros_like(sig)
    inv[1:] = 1.0 / sig[1:]
    return (vec * inv) @ vec.T


def kc_parts(g: Graph, v: int, inv: np.ndarray | None = None) -> tuple[float, float]:
    """(Tr((I - P_v)^-1), (1/2m) d_v^T L_v^-1 d_v)."""
    if inv is None:
        inv = dense_grounded_inverse(g, v)
    keep = _others(g.n, v)
    d = g.degrees[keep].astype(np.float64)
    return float(np.diag(inv) @ d), float(d @ inv @ d / (2.0 * g.m))


def kc_decomposition(g: Graph, v: int, inv: np.ndarray | None = None) -> float:
    trace, weighted = kc_parts(g, v, inv)
    return trace - weighted


def kc_eigen(g: Graph) -> float:
    sig = np.linalg.eigvalsh(normalized_laplacian(g))
    return float(np.sum(1.0 / sig[1:]))


def wilson_cost(g: Graph, v: int, inv: np.ndarray | None = None) -> float:
    """Expected total steps of one Wilson run rooted at v: Tr((I - P_v)^-1)."""
    return kc_parts(g, v, inv)[0]


def exact_diag(g: Graph, cap: int | None = None) -> np.ndarray:
    _guard(g, cap)
    return np.diag(dense_pinv(g, cap=g.n)).copy()


def exact_ecc(g: Graph, cap: int | None = None) -> np.ndarray:
    diag = exact_diag(g, cap)
    return (g.n - 1) / (diag.sum() + g.n * diag)


def exact_kc(g: Graph, cap: int | None = None) -> float:
    _guard(g, cap)
    v = select_landmark(g)
    dec = kc_decomposition(g, v)
    eig = kc_eigen(g)
    if abs(dec - eig) > 1e-6 * max(1.0, abs(eig)):
        raise NumericError(f"Kemeny constant paths disagree: {dec!r} vs {eig!r}")
    return dec


def resistance_matrix(lp: np.ndarray) -> np.ndarray:
    d = np.diag(lp)
    return d[:, None] + d[None, :] - 2.0 * lp


def electrical_flow(g: Graph, injection: np.ndarray) -> dict[tuple[int, int], float]:
    """Current on every canonical edge (u < w), positive in the u -> w direction."""
    lp = pinv_bordered(g)
    volt = lp @ np.asarray(injection, dtype=np.float64)
    return {(int(u), int(w)): float(volt[u] - volt[w]) for u, w in g.edges()}


def tree_flow(t: RootedTree, injection: np.ndarray) -> dict[tuple[int, int], float]:
    """Flow on a tree when ``injection`` enters at each node and drains at the root."""
    ps = path_support(t, injection)
    out = {}
    for u, p in enumerate(t.parent):
        if p == NONE:
            continue
        key = (min(u, int(p)), max(u, int(p)))
        out[key] = ps[u] if u < p else -ps[u]
    return out


# -- exact spanning-tree enumeration -------------------------------------------------

@dataclass(frozen=True)
class TreeSet:
    trees: tuple[RootedTree, ...]
    root: int

    @property
    def count(self) -> int:
        return len(self.trees)


def matrix_tree_count(g: Graph, v: int = 0) -> int:
    """det(L_v) in exact integer arithmetic (Bareiss elimination via sympy)."""
    from sympy import Matrix

    keep = _others(g.n, v)
    lap = g.laplacian().astype(np.int64)[np.ix_(keep, keep)]
    return int(Matrix(lap.tolist()).det(method="bareiss"))


def _root_at(n: int, edges: list[tuple[int, int]], root: int) -> RootedTree:
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    parent = np.full(n, NONE, dtype=np.int64)
    seen = [False] * n
    seen[root] = True
    stack = [root]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if not seen[w]:
                seen[w] = True
                parent[w] = u
                stack.append(w)
    return RootedTree(root=root, parent=parent)


def enumerate_spanning_trees(g: Graph, root: int = 0, max_nodes: int = ENUM_MAX_NODES,
                             max_trees: int = ENUM_MAX_TREES) -> TreeSet:
    """Every spanning tree, by include/exclude branching over the edge list."""
    if g.n > max_nodes:
        raise OracleCapError(f"tree enumeration limited to {max_nodes} nodes, got {g.n}")
    expected = matrix_tree_count(g, root)
    if expected > max_trees:
        raise OracleCapError(f"graph has {expected} spanning trees; limit is {max_trees}")
    edges = [tuple(map(int, e)) for e in g.edges()]
    n = g.n
    found: list[list[tuple[int, int]]] = []

    def find(parent, x):
        while parent[x] != x:
            x = parent[x]
        return x

    def connected_without(excluded: set) -> bool:
        parent = list(range(n))
        comps = n
        for e in edges:
            if e in excluded:
                continue
            a, b = find(parent, e[0]), find(parent, e[1])
            if a != b:
                parent[a] = b
                comps -= 1
        return comps == 1

    def rec(i, chosen, uf, excluded):
        if len(chosen) == n - 1:
            found.append(list(chosen))
            return
        if i == len(edges) or len(edges) - i < n - 1 - len(chosen):
            return
        a, b = edges[i]
        ra, rb = find(uf, a), find(uf, b)
        if ra != rb:
            uf2 = list(uf)
            uf2[ra] = rb
            chosen.append(edges[i])
            rec(i + 1, chosen, uf2, excluded)
            chosen.pop()
        excluded.add(edges[i])
        if connected_without(excluded):
            rec(i + 1, chosen, uf, excluded)
        excluded.discard(edges[i])

    rec(0, [], list(range(n)), set())
    trees = tuple(_root_at(n, es, root) for es in found)
    if len(trees) != expected:
        raise NumericError(f"enumerated {len(trees)} trees, matrix-tree theorem says {expected}")
    return TreeSet(trees=trees, root=root)


def _on_path(t: RootedTree, s: int, e1: int, e2: int) -> bool:
    """True when the tree path from s to the root traverses e1 -> e2."""
    if t.parent[e1] != e2:
        return False
    u = s
    while u != NONE:
        if u == e1:
            return True
        u = t.parent[u]
    return False


def tree_count_element(g: Graph, v: int, s: int, u: int,
                       ref_path: list[tuple[int, int]] | None = None,
                       trees: TreeSet | None = None) -> Fraction:
    """(L_v^-1)_{su} as a signed spanning-tree count along a u -> v path, exactly."""
    if trees is None:
        trees = enumerate_spanning_trees(g, v)
    if trees.root != v:
        raise ValueError("tree set must be rooted at the landmark")
    if ref_path is None:
        ref_path = root_path_edges(bfs_tree(g, v), u)
    signed = 0
    for e1, e2 in ref_path:
        for t in trees.trees:
            if _on_path(t, s, e1, e2):
                signed += 1
            elif _on_path(t, s, e2, e1):
                signed -= 1
    return Fraction(signed, trees.count)
