"""DFS interval indexing, root-path queries and path support on rooted trees."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .graph import NONE, RootedTree


@njit(cache=True)
def children_csr(parent, child_off, child_list):
    """Children of every node in ascending id order (counting sort over ``parent``)."""
    n = len(parent)
    for i in range(n + 1):
        child_off[i] = 0
    for u in range(n):
        p = parent[u]
        if p >= 0:
            child_off[p + 1] += 1
    for i in range(n):
        child_off[i + 1] += child_off[i]
    fill = child_off[:n].copy()
    for u in range(n):
        p = parent[u]
        if p >= 0:
            child_list[fill[p]] = u
            fill[p] += 1


@njit(cache=True)
def dfs_k(root, child_off, child_list, vis, fin, preorder, stack, cursor):
    """Iterative DFS. Entry and exit each consume one tick of a shared clock."""
    clock = 0
    top = 0
    stack[0] = root
    cursor[root] = child_off[root]
    vis[root] = clock
    clock += 1
    preorder[0] = root
    npre = 1
    while top >= 0:
        u = stack[top]
        c = cursor[u]
        if c < child_off[u + 1]:
            cursor[u] = c + 1
            w = child_list[c]
            vis[w] = clock
            clock += 1
            preorder[npre] = w
            npre += 1
            cursor[w] = child_off[w]
            top += 1
            stack[top] = w
        else:
            fin[u] = clock
            clock += 1
            top -= 1
    return npre


@njit(cache=True)
def subtree_sums_k(parent, preorder, weight, out):
    """out[u] = sum of ``weight`` over the subtree of u (reverse preorder sweep)."""
    n = len(parent)
    for i in range(n):
        out[i] = weight[i]
    for i in range(n - 1, 0, -1):
        u = preorder[i]
        out[parent[u]] += out[u]


@njit(inline="always")
def is_ancestor(vis, fin, a, u):
    return vis[a] <= vis[u] and fin[u] <= fin[a]


@dataclass(frozen=True)
class DfsIndex:
    vis: np.ndarray
    fin: np.ndarray


def dfs_index(t: RootedTree) -> DfsIndex:
    n = t.n
    child_off = np.empty(n + 1, dtype=np.int64)
    child_list = np.empty(max(n - 1, 1), dtype=np.int64)
    children_csr(t.parent, child_off, child_list)
    vis = np.empty(n, dtype=np.int64)
    fin = np.empty(n, dtype=np.int64)
    dfs_k(t.root, child_off, child_list, vis, fin, np.empty(n, np.int64),
          np.empty(n, np.int64), np.empty(n, np.int64))
    return DfsIndex(vis, fin)


def on_root_path(idx: DfsIndex, e1: int, u: int) -> bool:
    """True iff ``e1`` is an ancestor-or-self of ``u``, i.e. lies on u's path to the root."""
    return bool(idx.vis[e1] <= idx.vis[u] and idx.fin[u] <= idx.fin[e1])


def path_support(t: RootedTree, inj) -> np.ndarray:
    """Flow crossing each edge ``(u, parent[u])`` when ``inj[w]`` enters at every w
    and leaves at the root. ``ps[root]`` is 0."""
    n = t.n
    inj = np.asarray(inj, dtype=np.float64)
    child_off = np.empty(n + 1, dtype=np.int64)
    child_list = np.empty(max(n - 1, 1), dtype=np.int64)
    children_csr(t.parent, child_off, child_list)
    pre = np.empty(n, dtype=np.int64)
    dfs_k(t.root, child_off, child_list, np.empty(n, np.int64), np.empty(n, np.int64), pre,
          np.empty(n, np.int64), np.empty(n, np.int64))
    ps = np.empty(n, dtype=np.float64)
    subtree_sums_k(t.parent, pre, inj, ps)
    ps[t.root] = 0.0
    return ps


def root_path_edges(t: RootedTree, u: int) -> list[tuple[int, int]]:
    out = []
    while t.parent[u] != NONE:
        p = int(t.parent[u])
        out.append((int(u), p))
        u = p
    return out


def depths(t: RootedTree) -> np.ndarray:
    """Hop depth of every node below the root."""
    d = np.full(t.n, -1, dtype=np.int64)
    d[t.root] = 0
    for u in range(t.n):
        chain = []
        w = u
        while d[w] < 0:
            chain.append(w)
            w = int(t.parent[w])
        for x in reversed(chain):
            d[x] = d[w] + 1
            w = x
    return d


@njit(cache=True)
def aligned_contributions_k(bfs_parent, v, nxt, vis, fin, sub, c1, c2):
    """Signed unit and path-support counts along each node's reference (BFS) path.

    For every u and every reference edge (e1, e2) on u's path to ``v``: when the
    sampled tree routes u through e1 -> e2 add (+1, +sub[e1]); when it routes u
    through e2 -> e1 add (-1, -sub[e2]).
    """
    n = len(nxt)
    for u in range(n):
        a = 0
        b = 0
        if u != v:
            w = u
            while w != v:
                p = bfs_parent[w]
                if nxt[w] == p and is_ancestor(vis, fin, w, u):
                    a += 1
                    b += sub[w]
                elif nxt[p] == w and is_ancestor(vis, fin, p, u):
                    a -= 1
                    b -= sub[p]
                w = p
        c1[u] = a
        c2[u] = b
