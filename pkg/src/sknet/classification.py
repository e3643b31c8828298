"""Semi-supervised node classification from a few labeled seeds.

Two methods are provided: seeded-PageRank argmax (the primary, pure
matvec) and synchronous label propagation (the cheap baseline). Both
clamp the seeds and break score ties toward the smallest label id.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError
from .ranking import PageRankParams, pagerank
from .sparse import Graph


def compact_seed_labels(g: Graph, seeds):
    """(node -> class index map, sorted class list) from raw seed labels."""
    if not seeds:
        raise ParameterError("seed set must not be empty")
    classes = sorted(set(seeds.values()), key=str)
    if len(classes) < 2:
        raise ParameterError("need at least two distinct seed labels")
    index = {c: i for i, c in enumerate(classes)}
    out = {}
    for node, label in seeds.items():
        node = int(node)
        if not 0 <= node < g.n:
            raise ParameterError(f"seed node {node} out of range")
        out[node] = index[label]
    return out, classes


def pagerank_classifier(g: Graph, seeds, damping: float = 0.85,
                        iterations: int = 100) -> np.ndarray:
    """Per-label personalized PageRank, argmax assignment.

    Each label's score vector is divided by its seed count to correct
    label imbalance; seeds always keep their given label.
    """
    seed_ids, classes = compact_seed_labels(g, seeds)
    n_labels = len(classes)
    scores = np.zeros((g.n, n_labels))
    for label in range(n_labels):
        members = np.array(sorted(node for node, lab in seed_ids.items()
                                  if lab == label))
        restart = np.zeros(g.n)
        restart[members] = 1.0 / members.size
        ppr = pagerank(g, PageRankParams(damping=damping,
                                         iterations=iterations,
                                         restart=restart))
        scores[:, label] = ppr / members.size
    labels = np.argmax(scores, axis=1).astype(np.int64)
    for node, lab in seed_ids.items():
        labels[node] = lab
    return labels


def label_propagation(g: Graph, seeds, max_iters: int = 100) -> np.ndarray:
    """Synchronous flood: unlabeled nodes adopt the heaviest neighbor label.

    Seeds are clamped; labeled nodes keep their label; nodes never
    reached stay -1. Stops at a fixpoint or after ``max_iters`` rounds.
    """
    seed_ids, classes = compact_seed_labels(g, seeds)
    if max_iters < 1:
        raise ParameterError("max_iters must be >= 1")
    adj = g.adjacency if not g.directed else g.adjacency.symmetrize()
    n_labels = len(classes)
    labels = np.full(g.n, -1, dtype=np.int64)
    for node, lab in seed_ids.items():
        labels[node] = lab
    for _ in range(max_iters):
        unlabeled = np.flatnonzero(labels == -1)
        if unlabeled.size == 0:
            break
        updates = {}
        for u in unlabeled.tolist():
            cols, w = adj.row(u)
            neigh_labels = labels[cols]
            known = neigh_labels >= 0
            if not known.any():
                continue
            weight_per_label = np.bincount(neigh_labels[known],
                                           weights=w[known],
                                           minlength=n_labels)
            updates[u] = int(np.argmax(weight_per_label))
        if not updates:
            break
        for u, lab in updates.items():
            labels[u] = lab
    return labels
