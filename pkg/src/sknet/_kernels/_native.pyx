# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: CSR matvec, transpose, Louvain local-move sweep.

The pure-Python twin in ``_python.py`` keeps the same summation order,
so both backends agree bit-for-bit.
"""

import numpy as np

cimport numpy as cnp
from cython.parallel cimport prange

NAME = "native"

ctypedef fused idx_t:
    cnp.int32_t
    cnp.int64_t


def csr_matvec(cnp.int64_t[::1] indptr, idx_t[::1] indices,
               cnp.float64_t[::1] data, cnp.float64_t[::1] x,
               cnp.float64_t[::1] out, int num_threads):
    cdef Py_ssize_t n_rows = indptr.shape[0] - 1
    cdef Py_ssize_t i, k
    cdef double acc
    if n_rows == 0:
        return
    if num_threads <= 1:
        # serial fast path: no parallel-region entry cost
        with nogil:
            for i in range(n_rows):
                acc = 0.0
                for k in range(indptr[i], indptr[i + 1]):
                    acc = acc + data[k] * x[indices[k]]
                out[i] = acc
        return
    with nogil:
        for i in prange(n_rows, schedule='static', num_threads=num_threads):
            acc = 0.0
            for k in range(indptr[i], indptr[i + 1]):
                acc = acc + data[k] * x[indices[k]]
            out[i] = acc


def csr_transpose(cnp.int64_t[::1] indptr, idx_t[::1] indices,
                  cnp.float64_t[::1] data, cnp.int64_t[::1] out_indptr,
                  idx_t[::1] out_indices, cnp.float64_t[::1] out_data):
    cdef Py_ssize_t n_rows = indptr.shape[0] - 1
    cdef Py_ssize_t n_cols = out_indptr.shape[0] - 1
    cdef Py_ssize_t i, k, pos
    cdef cnp.int64_t[::1] next_slot = np.zeros(n_cols + 1, dtype=np.int64)
    with nogil:
        for i in range(n_cols + 1):
            out_indptr[i] = 0
        for k in range(indices.shape[0]):
            out_indptr[indices[k] + 1] += 1
        for i in range(n_cols):
            out_indptr[i + 1] += out_indptr[i]
        for i in range(n_cols):
            next_slot[i] = out_indptr[i]
        for i in range(n_rows):
            for k in range(indptr[i], indptr[i + 1]):
                pos = next_slot[indices[k]]
                out_indices[pos] = <idx_t> i
                out_data[pos] = data[k]
                next_slot[indices[k]] = pos + 1


def louvain_sweep(cnp.int64_t[::1] indptr, idx_t[::1] indices,
                  cnp.float64_t[::1] data, cnp.int64_t[::1] labels,
                  cnp.float64_t[::1] cluster_degree,
                  cnp.float64_t[::1] node_degree, cnp.int64_t[::1] order,
                  double resolution, double total, cnp.int64_t[::1] mv_node,
                  cnp.int64_t[::1] mv_from, cnp.int64_t[::1] mv_to,
                  cnp.float64_t[::1] mv_gain, bint record):
    cdef Py_ssize_t n = labels.shape[0]
    cdef double c1 = 2.0 / total
    cdef double res2 = 2.0 * resolution / (total * total)
    cdef cnp.float64_t[::1] wbuf = np.zeros(n, dtype=np.float64)
    cdef cnp.uint8_t[::1] seen = np.zeros(n, dtype=np.uint8)
    cdef cnp.int64_t[::1] touched = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t oi, k, t, ntouch
    cdef cnp.int64_t u, v, a, c, best_c
    cdef double du, c2, ka, stay, g, best_gain, dq, total_gain
    cdef Py_ssize_t n_moves = 0
    total_gain = 0.0
    with nogil:
        for oi in range(order.shape[0]):
            u = order[oi]
            if indptr[u] == indptr[u + 1]:
                continue
            ntouch = 0
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if v == u:
                    continue
                c = labels[v]
                if not seen[c]:
                    seen[c] = 1
                    touched[ntouch] = c
                    ntouch += 1
                wbuf[c] += data[k]
            if ntouch == 0:
                continue
            a = labels[u]
            du = node_degree[u]
            c2 = res2 * du
            ka = wbuf[a]
            stay = c1 * ka - c2 * (cluster_degree[a] - du)
            best_c = -1
            best_gain = 0.0
            for t in range(ntouch):
                c = touched[t]
                if c == a:
                    continue
                g = c1 * wbuf[c] - c2 * cluster_degree[c]
                if best_c < 0 or g > best_gain or (g == best_gain and c < best_c):
                    best_gain = g
                    best_c = c
            if best_c >= 0 and best_gain > stay:
                dq = best_gain - stay
                labels[u] = best_c
                cluster_degree[a] -= du
                cluster_degree[best_c] += du
                if record:
                    mv_node[n_moves] = u
                    mv_from[n_moves] = a
                    mv_to[n_moves] = best_c
                    mv_gain[n_moves] = dq
                n_moves += 1
                total_gain += dq
            for t in range(ntouch):
                wbuf[touched[t]] = 0.0
                seen[touched[t]] = 0
    return n_moves, total_gain
