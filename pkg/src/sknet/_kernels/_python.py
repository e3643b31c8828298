"""Pure-numpy fallback kernels.

Mirrors the native extension exactly: same signatures, same summation
order (left-to-right within a row), so results are interchangeable
bit-for-bit with the compiled backend.
"""

import numpy as np

NAME = "python"


def csr_matvec(indptr, indices, data, x, out, num_threads):
    """out[i] = sum_k data[k] * x[indices[k]] over row i's entries.

    Rows are processed in ``num_threads`` contiguous chunks; per-row sums
    accumulate in CSR order, so the result is identical for any chunking.
    """
    n_rows = indptr.shape[0] - 1
    if n_rows == 0:
        return
    chunks = max(1, min(int(num_threads), n_rows))
    bounds = np.linspace(0, n_rows, chunks + 1).astype(np.int64)
    row_lengths = np.diff(indptr)
    for c in range(chunks):
        r0, r1 = bounds[c], bounds[c + 1]
        if r0 == r1:
            continue
        s0, s1 = indptr[r0], indptr[r1]
        if s0 == s1:
            out[r0:r1] = 0.0
            continue
        rows = np.repeat(np.arange(r0, r1, dtype=np.int64), row_lengths[r0:r1])
        t = data[s0:s1] * x[indices[s0:s1]]
        out[r0:r1] = np.bincount(rows - r0, weights=t, minlength=r1 - r0)


def csr_transpose(indptr, indices, data, out_indptr, out_indices, out_data):
    """Transpose by stable counting sort on column indices."""
    n_rows = indptr.shape[0] - 1
    n_cols = out_indptr.shape[0] - 1
    nnz = indices.shape[0]
    counts = np.bincount(indices, minlength=n_cols)
    out_indptr[0] = 0
    np.cumsum(counts, out=out_indptr[1:])
    if nnz:
        rows = np.repeat(np.arange(n_rows, dtype=np.int64), np.diff(indptr))
        order = np.argsort(indices, kind="stable")
        out_indices[:] = rows[order].astype(out_indices.dtype)
        out_data[:] = data[order]


def louvain_sweep(indptr, indices, data, labels, cluster_degree, node_degree,
                  order, resolution, total, mv_node, mv_from, mv_to, mv_gain,
                  record):
    """One local-move sweep over ``order``; mutates labels/cluster_degree.

    Gain of inserting node u (already removed from its cluster) into
    cluster c is  (2/total)*k_uc - (2*resolution*d_u/total^2)*d_c.
    A move happens only when the best insertion beats re-inserting into
    the current cluster strictly; equal-gain ties keep the current
    cluster, and among new clusters the lowest id wins.
    """
    c1 = 2.0 / total
    res2 = 2.0 * resolution / (total * total)
    n_moves = 0
    total_gain = 0.0
    indptr_l = indptr.tolist()
    indices_l = indices.tolist()
    data_l = data.tolist()
    labels_l = labels.tolist()
    cluster_degree_l = cluster_degree.tolist()
    node_degree_l = node_degree.tolist()
    for u in order.tolist():
        start, end = indptr_l[u], indptr_l[u + 1]
        if start == end:
            continue
        # per-cluster neighbor weight, accumulated in CSR order (dict
        # insertion order mirrors the compiled kernel's touch order)
        wbuf = {}
        for k in range(start, end):
            v = indices_l[k]
            if v == u:
                continue
            c = labels_l[v]
            wbuf[c] = wbuf.get(c, 0.0) + data_l[k]
        if not wbuf:
            continue
        a = labels_l[u]
        du = node_degree_l[u]
        c2 = res2 * du
        stay = c1 * wbuf.get(a, 0.0) - c2 * (cluster_degree_l[a] - du)
        best_c = -1
        best_gain = 0.0
        for c, kc in wbuf.items():
            if c == a:
                continue
            g = c1 * kc - c2 * cluster_degree_l[c]
            if best_c < 0 or g > best_gain or (g == best_gain and c < best_c):
                best_gain = g
                best_c = c
        if best_c >= 0 and best_gain > stay:
            dq = best_gain - stay
            labels_l[u] = best_c
            cluster_degree_l[a] -= du
            cluster_degree_l[best_c] += du
            if record:
                mv_node[n_moves] = u
                mv_from[n_moves] = a
                mv_to[n_moves] = best_c
                mv_gain[n_moves] = dq
            n_moves += 1
            total_gain += dq
    labels[:] = labels_l
    cluster_degree[:] = cluster_degree_l
    return n_moves, total_gain
