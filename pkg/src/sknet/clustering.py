"""Louvain modularity optimization and partition utilities.

The local-move sweep lives in the kernel backends; this module owns the
pass/aggregation loop, seeding, and label bookkeeping, so both backends
share identical control flow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DimensionError, ParameterError
from .sparse import CsrMatrix, Graph


@dataclass
class LouvainParams:
    resolution: float = 1.0
    tol_gain: float = 1e-9
    max_passes: int = 100
    seed: int = 0

    def validated(self):
        if self.resolution <= 0:
            raise ParameterError("resolution must be > 0")
        if self.max_passes < 1:
            raise ParameterError("max_passes must be >= 1")
        return self


@dataclass
class LevelTrace:
    """One Louvain level: the graph it ran on and the accepted moves."""

    graph: Graph
    moves: list  # (node, from_cluster, to_cluster, gain) tuples


def compact_labels(labels):
    """Relabel to 0..k-1 in order of first occurrence."""
    labels = np.asarray(labels, dtype=np.int64)
    uniq, first_pos = np.unique(labels, return_index=True)
    order = np.argsort(np.argsort(first_pos))
    remap = np.empty(int(uniq.max()) + 1 if uniq.size else 0, dtype=np.int64)
    remap[uniq] = order
    return remap[labels] if labels.size else labels


def modularity(g: Graph, labels, resolution: float = 1.0) -> float:
    """Q = sum_c [w_c/w - resolution * (d_c/2w)^2] on the undirected graph."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (g.n,):
        raise DimensionError("label array length must equal node count")
    adj = g.adjacency if not g.directed else g.adjacency.symmetrize()
    total = adj.total()
    if total == 0:
        return 0.0
    rows = np.repeat(np.arange(adj.n_rows), np.diff(adj.indptr))
    same = labels[rows] == labels[adj.indices]
    intra = float(adj.data[same].sum())
    d_c = np.bincount(labels, weights=adj.degrees("rows"))
    return intra / total - resolution * float(np.sum((d_c / total) ** 2))


def aggregate(g: Graph, labels) -> Graph:
    """Contract clusters to super-nodes; self-loops keep intra weight."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (g.n,):
        raise DimensionError("label array length must equal node count")
    adj = g.adjacency
    k = int(labels.max()) + 1 if labels.size else 0
    rows = np.repeat(np.arange(adj.n_rows), np.diff(adj.indptr))
    agg = CsrMatrix.from_arrays(labels[rows], labels[adj.indices], adj.data,
                                k, k)
    return Graph(agg, directed=g.directed)


def louvain(g: Graph, params: LouvainParams = None, trace: bool = False):
    """Greedy modularity maximization (local moves + aggregation).

    Returns compacted labels; with ``trace=True`` also returns the list
    of per-level :class:`LevelTrace` records for gain auditing.
    """
    params = (params or LouvainParams()).validated()
    if g.n < 1:
        raise ParameterError("graph must have at least one node")
    work = g.undirected()
    current = work.adjacency
    total = current.total()
    rng = np.random.default_rng(params.seed)
    full_labels = np.arange(g.n, dtype=np.int64)
    traces = []
    if total > 0:
        backend = _kernels.active_backend()
        for _ in range(params.max_passes):
            n_cur = current.n_rows
            if n_cur <= 1:
                break
            node_degree = current.degrees("rows")
            labels = np.arange(n_cur, dtype=np.int64)
            cluster_degree = node_degree.copy()
            order = rng.permutation(n_cur).astype(np.int64)
            if trace:
                level_graph = Graph(current, directed=False)
                level_moves = []
            mv_cap = n_cur if trace else 0
            mv_node = np.empty(mv_cap, dtype=np.int64)
            mv_from = np.empty(mv_cap, dtype=np.int64)
            mv_to = np.empty(mv_cap, dtype=np.int64)
            mv_gain = np.empty(mv_cap, dtype=np.float64)
            level_gain = 0.0
            while True:
                n_moves, gain = backend.louvain_sweep(
                    current.indptr, current.indices, current.data, labels,
                    cluster_degree, node_degree, order, params.resolution,
                    total, mv_node, mv_from, mv_to, mv_gain, trace)
                if trace:
                    level_moves.extend(
                        zip(mv_node[:n_moves].tolist(),
                            mv_from[:n_moves].tolist(),
                            mv_to[:n_moves].tolist(),
                            mv_gain[:n_moves].tolist()))
                level_gain += gain
                if n_moves == 0 or gain <= params.tol_gain:
                    break
            if trace:
                traces.append(LevelTrace(level_graph, level_moves))
            if level_gain <= params.tol_gain:
                break
            labels = compact_labels(labels)
            full_labels = labels[full_labels]
            current = CsrMatrix.from_arrays(
                labels[np.repeat(np.arange(n_cur), np.diff(current.indptr))],
                labels[current.indices], current.data,
                int(labels.max()) + 1, int(labels.max()) + 1)
    result = compact_labels(full_labels)
    if trace:
        return result, traces
    return result


def soft_membership(g: Graph, labels) -> CsrMatrix:
    """Rows distribute each node's edge weight over neighboring clusters.

    This is this library's definition of a soft assignment: row i holds
    the fraction of i's weighted degree pointing into each cluster;
    isolated nodes get a hard 1 on their own cluster.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (g.n,):
        raise DimensionError("label array length must equal node count")
    adj = g.adjacency if not g.directed else g.adjacency.symmetrize()
    k = int(labels.max()) + 1 if labels.size else 0
    rows = np.repeat(np.arange(adj.n_rows), np.diff(adj.indptr))
    cols = labels[adj.indices]
    isolated = np.flatnonzero(adj.degrees("rows") == 0)
    rows = np.concatenate([rows, isolated])
    cols = np.concatenate([cols, labels[isolated]])
    data = np.concatenate([adj.data, np.ones(isolated.size)])
    return CsrMatrix.from_arrays(rows, cols, data, g.n, k).normalize_rows()
