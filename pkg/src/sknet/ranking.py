"""Node importance scores: PageRank, HITS, Katz, harmonic centrality."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .connectivity import bfs
from .errors import DegenerateInputError, ParameterError
from .sparse import Graph


@dataclass
class PageRankParams:
    """Damped random-walk parameters.

    ``tolerance`` enables an early stop on the L1 change between
    iterations; it is off by default so timed runs execute exactly
    ``iterations`` steps.
    """

    damping: float = 0.85
    iterations: int = 100
    restart: object = None
    tolerance: float = None

    def validated(self, n):
        if not 0 <= self.damping < 1:
            raise ParameterError("damping must lie in [0, 1)")
        if self.iterations < 0:
            raise ParameterError("iterations must be >= 0")
        if self.restart is None:
            restart = np.full(n, 1.0 / n)
        else:
            restart = np.ascontiguousarray(self.restart, dtype=np.float64)
            if restart.shape != (n,):
                raise ParameterError("restart vector length must equal n")
            if restart.min() < 0 or abs(restart.sum() - 1.0) > 1e-9:
                raise ParameterError("restart must be a probability vector")
        return restart


def pagerank(g: Graph, params: PageRankParams = None) -> np.ndarray:
    """Stationary scores of the damped walk with restart.

    Dangling nodes redistribute their mass through the restart vector,
    so the scores sum to one at every iteration.
    """
    params = params or PageRankParams()
    n = g.n
    if n < 1:
        raise ParameterError("graph must have at least one node")
    restart = params.validated(n)
    out_degree = g.adjacency.degrees("rows")
    dangling = np.flatnonzero(out_degree == 0)
    pt = g.adjacency.normalize_rows().transpose()
    damping = params.damping
    x = restart.copy()
    for _ in range(params.iterations):
        nxt = damping * (pt.matvec(x) + x[dangling].sum() * restart) \
            + (1.0 - damping) * restart
        if params.tolerance is not None \
                and np.abs(nxt - x).sum() < params.tolerance:
            x = nxt
            break
        x = nxt
    return x


def hits(g: Graph, iterations: int = 100, tolerance: float = 0.0):
    """(hubs, authorities): alternating unit-norm iteration from all-ones."""
    if g.adjacency.nnz == 0:
        raise DegenerateInputError("hits needs at least one edge")
    if iterations < 1:
        raise ParameterError("iterations must be >= 1")
    a = g.adjacency
    at = a.transpose()
    n = g.n
    hubs = np.ones(n)
    auth = np.ones(n)
    for _ in range(iterations):
        new_auth = at.matvec(hubs)
        norm = np.linalg.norm(new_auth)
        if norm == 0:
            raise DegenerateInputError("authority scores vanished")
        new_auth /= norm
        new_hubs = a.matvec(new_auth)
        norm = np.linalg.norm(new_hubs)
        if norm == 0:
            raise DegenerateInputError("hub scores vanished")
        new_hubs /= norm
        delta = np.abs(new_auth - auth).sum() + np.abs(new_hubs - hubs).sum()
        auth, hubs = new_auth, new_hubs
        if tolerance > 0 and delta < tolerance:
            break
    return hubs, auth


def katz(g: Graph, alpha: float, depth: int = 10) -> np.ndarray:
    """Truncated Katz centrality: sum over t of alpha^t (A^T)^t applied to 1."""
    if alpha < 0:
        raise ParameterError("alpha must be >= 0")
    if depth < 0:
        raise ParameterError("depth must be >= 0")
    at = g.adjacency.transpose()
    out = np.zeros(g.n)
    term = np.ones(g.n)
    for _ in range(depth):
        term = alpha * at.matvec(term)
        out += term
    return out


def harmonic_centrality(g: Graph) -> np.ndarray:
    """score[i] = sum of 1/dist(i, j) over nodes reachable from i (hops)."""
    n = g.n
    out = np.zeros(n)
    for s in range(n):
        dist = bfs(g, s).dist
        finite = np.isfinite(dist) & (dist > 0)
        out[s] = np.sum(1.0 / dist[finite])
    return out
