"""Traversals, shortest paths and component structure."""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .sparse import Graph


@dataclass
class PathResult:
    """Distances and predecessors from a single source.

    Unreachable nodes carry ``inf`` distance and predecessor -1; the
    source is its own predecessor.
    """

    source: int
    dist: np.ndarray
    pred: np.ndarray


def _check_source(g, source):
    if not 0 <= source < g.n:
        raise ParameterError(f"source {source} out of range for n={g.n}")


def bfs(g: Graph, source: int) -> PathResult:
    """Hop distances; neighbors explored in CSR index order.

    Level-synchronous and fully vectorized, but predecessor assignment
    reproduces the classic queue traversal exactly: the first finder in
    queue-then-CSR order wins.
    """
    _check_source(g, source)
    n = g.n
    adj = g.adjacency
    dist = np.full(n, np.inf)
    pred = np.full(n, -1, dtype=np.int64)
    dist[source] = 0.0
    pred[source] = source
    frontier = np.array([source], dtype=np.int64)
    level = 0
    while frontier.size:
        starts = adj.indptr[frontier]
        counts = adj.indptr[frontier + 1] - starts
        total = int(counts.sum())
        if total == 0:
            break
        offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts,
                                               counts)
        neigh = adj.indices[np.repeat(starts, counts) + offsets]
        owner = np.repeat(frontier, counts)
        uniq, first_idx = np.unique(neigh, return_index=True)
        new_mask = np.isinf(dist[uniq])
        new_nodes = uniq[new_mask].astype(np.int64)
        finders = owner[first_idx[new_mask]]
        level += 1
        dist[new_nodes] = float(level)
        pred[new_nodes] = finders
        # next frontier in discovery order, matching the queue traversal
        frontier = new_nodes[np.argsort(first_idx[new_mask], kind="stable")]
    return PathResult(source, dist, pred)


def dijkstra(g: Graph, source: int) -> PathResult:
    """Weighted shortest paths (non-negative weights), binary heap."""
    _check_source(g, source)
    n = g.n
    adj = g.adjacency
    dist = np.full(n, np.inf)
    pred = np.full(n, -1, dtype=np.int64)
    dist[source] = 0.0
    pred[source] = source
    heap = [(0.0, source)]
    done = np.zeros(n, dtype=bool)
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        cols, w = adj.row(u)
        for v, wv in zip(cols.tolist(), w.tolist()):
            nd = d + wv
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
    return PathResult(source, dist, pred)


def reconstruct_path(result: PathResult, target: int):
    """Node sequence source..target, or None when unreachable."""
    if not np.isfinite(result.dist[target]):
        return None
    path = [target]
    while path[-1] != result.source:
        path.append(int(result.pred[path[-1]]))
    return path[::-1]


def connected_components(g: Graph) -> np.ndarray:
    """Weak component labels, numbered by smallest contained node id."""
    adj = g.adjacency if not g.directed else g.adjacency.symmetrize()
    n = g.n
    labels = np.full(n, -1, dtype=np.int64)
    current = 0
    for s in range(n):
        if labels[s] != -1:
            continue
        labels[s] = current
        stack = [s]
        while stack:
            u = stack.pop()
            cols, _ = adj.row(u)
            for v in cols.tolist():
                if labels[v] == -1:
                    labels[v] = current
                    stack.append(v)
        current += 1
    return labels


def strongly_connected_components(g: Graph) -> np.ndarray:
    """Tarjan's algorithm, iterative with an explicit stack.

    Component ids follow completion order, which is the reverse
    topological order of the condensation.
    """
    n = g.n
    indptr = g.adjacency.indptr
    indices = g.adjacency.indices
    index = np.full(n, -1, dtype=np.int64)
    low = np.zeros(n, dtype=np.int64)
    on_stack = np.zeros(n, dtype=bool)
    labels = np.full(n, -1, dtype=np.int64)
    counter = 0
    n_comp = 0
    scc_stack = []
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, indptr[root])]
        index[root] = low[root] = counter
        counter += 1
        scc_stack.append(root)
        on_stack[root] = True
        while work:
            u, ptr = work[-1]
            advanced = False
            while ptr < indptr[u + 1]:
                v = int(indices[ptr])
                ptr += 1
                if index[v] == -1:
                    work[-1] = (u, ptr)
                    index[v] = low[v] = counter
                    counter += 1
                    scc_stack.append(v)
                    on_stack[v] = True
                    work.append((v, indptr[v]))
                    advanced = True
                    break
                if on_stack[v] and index[v] < low[u]:
                    low[u] = index[v]
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                if low[u] < low[parent]:
                    low[parent] = low[u]
            if low[u] == index[u]:
                while True:
                    v = scc_stack.pop()
                    on_stack[v] = False
                    labels[v] = n_comp
                    if v == u:
                        break
                n_comp += 1
    return labels
