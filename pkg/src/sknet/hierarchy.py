"""Agglomerative hierarchies: merge-table dendrograms, cuts, compression.

The linkage distance between clusters a and b is
``W_a * W_b / (w * X_ab)`` where ``W`` are normalized cluster weights
(degree fractions), ``w`` the total edge weight and ``X_ab`` the
inter-cluster weight. This sampling-ratio linkage only needs neighbor
weights, satisfies the reducibility condition required by the
nearest-neighbor chain, and is this library's documented choice.
"""

from __future__ import annotations

import numpy as np

from .connectivity import connected_components
from .errors import DegenerateInputError, FormatError, ParameterError
from .sparse import Graph


class Dendrogram:
    """(n-1) x 4 merge table: child_a, child_b, height, size.

    Children below ``n_leaves`` are leaves; ``n_leaves + t`` refers to
    the merge created at step t. ``kept_nodes`` maps leaf index to the
    original node id when the input was restricted to its largest
    component; ``leaf_groups`` maps leaves of a compressed dendrogram to
    the original leaf ids they absorbed.
    """

    def __init__(self, n_leaves, merges, kept_nodes=None, leaf_groups=None):
        self.n_leaves = int(n_leaves)
        self.merges = np.asarray(merges, dtype=np.float64).reshape(-1, 4)
        self.kept_nodes = kept_nodes
        self.leaf_groups = leaf_groups

    @property
    def restricted(self):
        """True when nodes outside the largest component were dropped."""
        return self.kept_nodes is not None

    def __repr__(self):
        return f"Dendrogram(n_leaves={self.n_leaves}, merges={len(self.merges)})"


def validate_dendrogram(d: Dendrogram):
    """Raise FormatError unless the merge table is structurally sound."""
    n = d.n_leaves
    k = d.merges.shape[0]
    if k != max(n - 1, 0):
        raise FormatError(f"expected {max(n - 1, 0)} merges for {n} leaves, "
                          f"got {k}")
    if k == 0:
        return
    sizes = np.ones(n + k)
    used = np.zeros(n + k, dtype=bool)
    heights = d.merges[:, 2]
    if not np.all(np.isfinite(heights)) or np.any(heights < 0):
        raise FormatError("heights must be finite and >= 0")
    if np.any(np.diff(heights) < 0):
        raise FormatError("heights must be non-decreasing")
    for t in range(k):
        a, b, _, size = d.merges[t]
        for child in (a, b):
            if child != int(child) or not 0 <= child < n + t:
                raise FormatError(f"merge {t}: invalid child {child}")
            if used[int(child)]:
                raise FormatError(f"merge {t}: child {int(child)} reused")
            used[int(child)] = True
        sizes[n + t] = sizes[int(a)] + sizes[int(b)]
        if sizes[n + t] != size:
            raise FormatError(f"merge {t}: size {size} != "
                              f"{sizes[int(a)]} + {sizes[int(b)]}")
    if sizes[-1] != n:
        raise FormatError("final merge must cover all leaves")


def _largest_component(g: Graph):
    labels = connected_components(g)
    counts = np.bincount(labels)
    keep_label = int(np.argmax(counts))
    kept = np.flatnonzero(labels == keep_label)
    if kept.size == g.n:
        return g, None
    pos = -np.ones(g.n, dtype=np.int64)
    pos[kept] = np.arange(kept.size)
    adj = g.adjacency
    rows = np.repeat(np.arange(g.n), np.diff(adj.indptr))
    mask = (pos[rows] >= 0) & (pos[adj.indices] >= 0)
    sub = adj.__class__.from_arrays(pos[rows[mask]], pos[adj.indices[mask]],
                                    adj.data[mask], kept.size, kept.size)
    return Graph(sub, directed=False), kept


def agglomerate(g: Graph) -> Dendrogram:
    """Nearest-neighbor-chain agglomeration into a merge-table dendrogram.

    Directed input is symmetrized; disconnected input is restricted to
    its largest component (flagged via ``kept_nodes``). Heights are the
    linkage distances at merge time, made non-decreasing by running max.
    """
    work = g.undirected()
    work, kept = _largest_component(work)
    n = work.n
    if n < 2 or work.adjacency.nnz == 0:
        raise DegenerateInputError("agglomeration needs at least one edge "
                                   "between distinct nodes")
    adj = work.adjacency
    total = adj.total()
    w = total / 2.0
    degree = adj.degrees("rows")
    weight = {i: degree[i] / total for i in range(n)}
    size = {i: 1 for i in range(n)}
    neighbors = {i: {} for i in range(n)}
    rows = np.repeat(np.arange(n), np.diff(adj.indptr))
    for i, j, x in zip(rows.tolist(), adj.indices.tolist(), adj.data.tolist()):
        if i < j:
            neighbors[i][j] = neighbors[i].get(j, 0.0) + x
            neighbors[j][i] = neighbors[j].get(i, 0.0) + x

    def distance(a, b):
        x = neighbors[a].get(b, 0.0)
        return weight[a] * weight[b] / (w * x) if x > 0 else np.inf

    merges = []
    next_id = n
    active = set(range(n))
    chain = []
    while len(active) > 1:
        if not chain:
            chain.append(min(active))
        x = chain[-1]
        best, best_d = -1, np.inf
        for c in neighbors[x]:
            dxc = distance(x, c)
            if dxc < best_d or (dxc == best_d and c < best):
                best, best_d = c, dxc
        if best < 0:
            raise DegenerateInputError("component unexpectedly split")
        if len(chain) >= 2 and best == chain[-2]:
            a, b = chain[-2], chain[-1]
            chain = chain[:-2]
            m = next_id
            next_id += 1
            merges.append((min(a, b), max(a, b), best_d,
                           size[a] + size[b]))
            weight[m] = weight[a] + weight[b]
            size[m] = size[a] + size[b]
            merged = {}
            for old in (a, b):
                for c, x in neighbors[old].items():
                    if c in (a, b):
                        continue
                    merged[c] = merged.get(c, 0.0) + x
                    del neighbors[c][old]
            neighbors[m] = merged
            for c, x in merged.items():
                neighbors[c][m] = x
            del neighbors[a], neighbors[b]
            active.discard(a)
            active.discard(b)
            active.add(m)
        else:
            chain.append(best)
    table = np.array(merges, dtype=np.float64).reshape(-1, 4)
    # running max keeps the standard non-decreasing height invariant
    table[:, 2] = np.maximum.accumulate(table[:, 2])
    return Dendrogram(n, table, kept_nodes=kept)


def cut_straight(d: Dendrogram, n_clusters: int) -> np.ndarray:
    """Undo the last ``n_clusters - 1`` merges; labels by first node."""
    n = d.n_leaves
    if not 1 <= n_clusters <= n:
        raise ParameterError(f"n_clusters must lie in [1, {n}]")
    k = n - n_clusters  # merges to apply
    parent = np.arange(n + k, dtype=np.int64)
    for t in range(k):
        a, b = int(d.merges[t, 0]), int(d.merges[t, 1])
        parent[a] = n + t
        parent[b] = n + t
    labels = np.empty(n, dtype=np.int64)
    roots = {}
    for i in range(n):
        r = i
        while parent[r] != r:
            r = parent[r]
        if r not in roots:
            roots[r] = len(roots)
        labels[i] = roots[r]
    return labels


def compress(d: Dendrogram, min_size: int) -> Dendrogram:
    """Collapse every maximal subtree smaller than ``min_size`` to a leaf.

    Surviving merges keep their heights; sizes are recounted in units of
    the new leaves; ``leaf_groups`` records which original leaves each
    new leaf absorbed (ordered by smallest original id).
    """
    n = d.n_leaves
    if min_size < 1:
        raise ParameterError("min_size must be >= 1")
    if min_size >= n:
        raise ParameterError(f"min_size must be smaller than the leaf "
                             f"count {n}")
    if min_size == 1:
        groups = [np.array([i]) for i in range(n)]
        return Dendrogram(n, d.merges.copy(), kept_nodes=d.kept_nodes,
                          leaf_groups=groups)
    k = d.merges.shape[0]
    sizes = np.ones(n + k)
    for t in range(k):
        sizes[n + t] = d.merges[t, 3]
    parent_size = np.full(n + k, np.inf)
    for t in range(k):
        a, b = int(d.merges[t, 0]), int(d.merges[t, 1])
        parent_size[a] = sizes[n + t]
        parent_size[b] = sizes[n + t]
    collapsed = [x for x in range(n + k)
                 if sizes[x] < min_size and parent_size[x] >= min_size]

    def leaves_of(x):
        out = []
        stack = [x]
        while stack:
            y = stack.pop()
            if y < n:
                out.append(y)
            else:
                t = y - n
                stack.append(int(d.merges[t, 0]))
                stack.append(int(d.merges[t, 1]))
        return sorted(out)

    members_of = {x: leaves_of(x) for x in collapsed}
    order = sorted(collapsed, key=lambda x: members_of[x][0])
    groups = [members_of[x] for x in order]
    n_new = len(groups)
    new_id_of = {root: i for i, root in enumerate(order)}
    new_merges = []
    new_sizes = {i: 1 for i in range(n_new)}
    s = 0
    for t in range(k):
        if sizes[n + t] < min_size:
            continue
        a, b = int(d.merges[t, 0]), int(d.merges[t, 1])
        na, nb = new_id_of[a], new_id_of[b]
        new_size = new_sizes[na] + new_sizes[nb]
        new_merges.append((min(na, nb), max(na, nb), d.merges[t, 2],
                           new_size))
        mid = n_new + s
        new_id_of[n + t] = mid
        new_sizes[mid] = new_size
        s += 1
    table = np.array(new_merges, dtype=np.float64).reshape(-1, 4)
    return Dendrogram(n_new, table, kept_nodes=d.kept_nodes,
                      leaf_groups=[np.array(m) for m in groups])


def dendrogram_to_tsv(d: Dendrogram) -> str:
    """Four tab-separated columns, one merge per row."""
    lines = []
    for a, b, h, size in d.merges:
        lines.append(f"{int(a)}\t{int(b)}\t{h:.12g}\t{int(size)}")
    return "\n".join(lines) + ("\n" if lines else "")


def dendrogram_from_tsv(text) -> Dendrogram:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#%":
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise FormatError(f"line {lineno}: expected 4 columns")
        rows.append([float(f) for f in fields])
    d = Dendrogram(len(rows) + 1, np.array(rows, dtype=np.float64))
    validate_dendrogram(d)
    return d
