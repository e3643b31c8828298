"""CSR sparse matrices, graph wrappers and linear operators.

Conventions used throughout the package:

* weights are 64-bit floats, finite and non-negative;
* ``indptr`` is always int64, ``indices`` is int32 when both the column
  count and nnz fit, int64 otherwise;
* within each row, column indices are strictly increasing;
* undirected graphs store a symmetric adjacency in which every
  undirected edge {u, v} appears as two entries and a self-loop's weight
  appears doubled on the diagonal, so that weighted degrees, total
  weight and modularity are plain row sums over the matrix.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .errors import ConstructionError, DimensionError, ParameterError

_INT32_MAX = np.iinfo(np.int32).max


def _index_dtype(n_cols, nnz):
    if n_cols <= _INT32_MAX and nnz <= _INT32_MAX:
        return np.int32
    return np.int64


class CsrMatrix:
    """Compressed sparse row matrix with non-negative float64 weights.

    Immutable after construction; safe to share across threads.
    """

    __slots__ = ("n_rows", "n_cols", "indptr", "indices", "data")

    def __init__(self, n_rows, n_cols, indptr, indices, data, validate=True):
        self.n_rows = int(n_rows)
        self.n_cols = int(n_cols)
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        dtype = indices.dtype if hasattr(indices, "dtype") else None
        if dtype not in (np.dtype(np.int32), np.dtype(np.int64)):
            dtype = _index_dtype(self.n_cols, len(indices))
        self.indices = np.ascontiguousarray(indices, dtype=dtype)
        self.data = np.ascontiguousarray(data, dtype=np.float64)
        if validate:
            self.validate()

    # -- construction ------------------------------------------------

    @classmethod
    def from_edge_list(cls, edges, n_rows, n_cols, dedup="sum"):
        """Build a CSR matrix from (row, col, weight) triples.

        Duplicate (row, col) pairs are combined by summing weights; this
        is the only supported ``dedup`` policy.
        """
        if dedup != "sum":
            raise ParameterError(f"unsupported dedup policy {dedup!r}")
        if len(edges) == 0:
            rows = np.empty(0, dtype=np.int64)
            cols = np.empty(0, dtype=np.int64)
            weights = np.empty(0, dtype=np.float64)
        else:
            arr = np.asarray(edges, dtype=np.float64)
            if arr.ndim != 2 or arr.shape[1] != 3:
                raise ConstructionError("edges must be (row, col, weight) triples")
            rows = arr[:, 0].astype(np.int64)
            cols = arr[:, 1].astype(np.int64)
            weights = arr[:, 2]
        return cls.from_arrays(rows, cols, weights, n_rows, n_cols)

    @classmethod
    def from_arrays(cls, rows, cols, weights, n_rows, n_cols):
        """Vector form of :meth:`from_edge_list` (duplicates summed)."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        weights = np.asarray(weights, dtype=np.float64)
        if not (rows.shape == cols.shape == weights.shape):
            raise ConstructionError("rows, cols and weights must have equal length")
        if rows.size:
            if rows.min() < 0 or rows.max() >= n_rows:
                raise ConstructionError("row index out of range")
            if cols.min() < 0 or cols.max() >= n_cols:
                raise ConstructionError("column index out of range")
            if not np.all(np.isfinite(weights)) or weights.min() < 0:
                raise ConstructionError("weights must be finite and >= 0")
        # Sort by (row, col), then merge duplicates by summation.
        order = np.lexsort((cols, rows))
        rows, cols, weights = rows[order], cols[order], weights[order]
        if rows.size:
            first = np.empty(rows.size, dtype=bool)
            first[0] = True
            np.logical_or(np.diff(rows) != 0, np.diff(cols) != 0, out=first[1:])
            group = np.cumsum(first) - 1
            weights = np.bincount(group, weights=weights)
            rows, cols = rows[first], cols[first]
        indptr = np.zeros(n_rows + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n_rows), out=indptr[1:])
        dtype = _index_dtype(n_cols, cols.size)
        return cls(n_rows, n_cols, indptr, cols.astype(dtype), weights,
                   validate=False)

    @classmethod
    def from_dense(cls, dense):
        """CSR from a dense non-negative matrix (zeros dropped)."""
        dense = np.asarray(dense, dtype=np.float64)
        rows, cols = np.nonzero(dense)
        return cls.from_arrays(rows, cols, dense[rows, cols],
                               dense.shape[0], dense.shape[1])

    # -- invariants ---------------------------------------------------

    def validate(self):
        """Raise ConstructionError unless all CSR invariants hold."""
        if self.indptr.shape[0] != self.n_rows + 1:
            raise ConstructionError("indptr length must be n_rows + 1")
        if self.indptr[0] != 0 or self.indptr[-1] != len(self.indices):
            raise ConstructionError("indptr must start at 0 and end at nnz")
        if np.any(np.diff(self.indptr) < 0):
            raise ConstructionError("indptr must be non-decreasing")
        if len(self.indices) != len(self.data):
            raise ConstructionError("indices and data lengths differ")
        if self.indices.size:
            if self.indices.min() < 0 or self.indices.max() >= self.n_cols:
                raise ConstructionError("column index out of range")
            inside = np.ones(self.indices.size, dtype=bool)
            bounds = self.indptr[1:-1]
            inside[bounds[bounds < self.indices.size]] = False
            if np.any((np.diff(self.indices) <= 0) & inside[1:]):
                raise ConstructionError("row indices must be strictly increasing")
            if not np.all(np.isfinite(self.data)) or self.data.min() < 0:
                raise ConstructionError("weights must be finite and >= 0")

    # -- basic properties --------------------------------------------

    @property
    def nnz(self):
        return int(self.indices.shape[0])

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    @property
    def index_width(self):
        """Bytes per stored column index (4 or 8)."""
        return self.indices.dtype.itemsize

    def nbytes(self):
        """Exact array payload: (n_rows+1)*8 + nnz*(index_width+8)."""
        return self.indptr.nbytes + self.indices.nbytes + self.data.nbytes

    def row(self, i):
        """(column indices, weights) of row i, views into the arrays."""
        s, e = self.indptr[i], self.indptr[i + 1]
        return self.indices[s:e], self.data[s:e]

    def to_dense(self):
        out = np.zeros((self.n_rows, self.n_cols))
        rows = np.repeat(np.arange(self.n_rows), np.diff(self.indptr))
        out[rows, self.indices] = self.data
        return out

    # -- kernels -------------------------------------------------------

    def matvec(self, x):
        """Dense matrix-vector product y = M @ x."""
        x = np.ascontiguousarray(x, dtype=np.float64)
        if x.shape != (self.n_cols,):
            raise DimensionError(
                f"matvec expects a vector of length {self.n_cols}, got {x.shape}")
        out = np.empty(self.n_rows, dtype=np.float64)
        # cap workers by available work (parallel-region entry costs more
        # than a medium matvec); the row partition keeps the result
        # bit-identical for any thread count
        threads = min(_kernels.get_num_threads(), 1 + self.nnz // 1_000_000)
        _kernels.active_backend().csr_matvec(
            self.indptr, self.indices, self.data, x, out, threads)
        return out

    def __matmul__(self, x):
        return self.matvec(x)

    def transpose(self):
        out_indptr = np.zeros(self.n_cols + 1, dtype=np.int64)
        out_indices = np.empty(self.nnz, dtype=self.indices.dtype)
        out_data = np.empty(self.nnz, dtype=np.float64)
        _kernels.active_backend().csr_transpose(
            self.indptr, self.indices, self.data,
            out_indptr, out_indices, out_data)
        return CsrMatrix(self.n_cols, self.n_rows, out_indptr, out_indices,
                         out_data, validate=False)

    def symmetrize(self):
        """m + m.T with duplicate entries merged by summation."""
        if self.n_rows != self.n_cols:
            raise DimensionError("symmetrize requires a square matrix")
        rows = np.repeat(np.arange(self.n_rows, dtype=np.int64),
                         np.diff(self.indptr))
        cols = self.indices.astype(np.int64)
        return CsrMatrix.from_arrays(
            np.concatenate([rows, cols]), np.concatenate([cols, rows]),
            np.concatenate([self.data, self.data]), self.n_rows, self.n_cols)

    def degrees(self, axis="rows"):
        """Per-row or per-column weight sums."""
        if axis == "rows":
            return self.matvec(np.ones(self.n_cols))
        if axis == "cols":
            return np.bincount(self.indices, weights=self.data,
                               minlength=self.n_cols)
        raise ParameterError(f"axis must be 'rows' or 'cols', got {axis!r}")

    def normalize_rows(self):
        """Divide each row by its sum; all-zero rows are left untouched."""
        sums = self.degrees("rows")
        scale = np.divide(1.0, sums, out=np.zeros_like(sums), where=sums > 0)
        rows = np.repeat(np.arange(self.n_rows), np.diff(self.indptr))
        return CsrMatrix(self.n_rows, self.n_cols, self.indptr, self.indices,
                         self.data * scale[rows], validate=False)

    def total(self):
        """Sum of all stored weights."""
        return float(self.data.sum())

    def diagonal(self):
        out = np.zeros(min(self.n_rows, self.n_cols))
        rows = np.repeat(np.arange(self.n_rows, dtype=np.int64),
                         np.diff(self.indptr))
        on_diag = rows == self.indices
        out[rows[on_diag]] = self.data[on_diag]
        return out

    def __repr__(self):
        return (f"CsrMatrix({self.n_rows}x{self.n_cols}, nnz={self.nnz}, "
                f"idx={self.indices.dtype.name})")


def matvec(op, x):
    """Apply any linear operator (CsrMatrix or operator object) to x."""
    return op.matvec(x)


def transpose(m):
    return m.transpose()


def symmetrize(m):
    return m.symmetrize()


def degrees(m, axis="rows"):
    return m.degrees(axis)


def normalize_rows(m):
    return m.normalize_rows()


def from_edge_list(edges, n_rows, n_cols, dedup="sum"):
    return CsrMatrix.from_edge_list(edges, n_rows, n_cols, dedup)


class TransposedOperator:
    """Lazy transpose: materializes m.T once, at construction."""

    def __init__(self, m):
        self._t = m.transpose()
        self.n_rows, self.n_cols = m.n_cols, m.n_rows

    def matvec(self, x):
        return self._t.matvec(x)


class RegularizedOperator:
    """y = m @ x + (gamma / n_cols) * sum(x) * ones(n_rows).

    The rank-one term is applied analytically, never materialized.
    """

    def __init__(self, m, gamma):
        if gamma < 0:
            raise ParameterError("gamma must be >= 0")
        self.base = m
        self.gamma = float(gamma)
        self.n_rows, self.n_cols = m.n_rows, m.n_cols

    def matvec(self, x):
        y = self.base.matvec(x)
        if self.gamma > 0:
            y += (self.gamma / self.n_cols) * np.sum(x)
        return y


def regularized_op(m, gamma):
    """Rank-one-augmented operator; gamma = 0 degenerates to plain matvec."""
    return RegularizedOperator(m, gamma)


class Graph:
    """Square adjacency wrapper with optional node names.

    For undirected graphs the adjacency is symmetric and each self-loop's
    weight is stored doubled on the diagonal (so degrees count loops
    twice, the standard modularity convention).
    """

    def __init__(self, adjacency, directed=False, names=None):
        if adjacency.n_rows != adjacency.n_cols:
            raise DimensionError("adjacency must be square")
        self.adjacency = adjacency
        self.directed = bool(directed)
        self.names = None if names is None else list(names)
        if self.names is not None and len(self.names) != adjacency.n_rows:
            raise DimensionError("names length must equal node count")

    @property
    def n(self):
        return self.adjacency.n_rows

    @property
    def m(self):
        """Edge count: arcs when directed, undirected edges otherwise."""
        if self.directed:
            return self.adjacency.nnz
        n_diag = int(np.count_nonzero(self.adjacency.diagonal()))
        return (self.adjacency.nnz - n_diag) // 2 + n_diag

    def degrees(self):
        return self.adjacency.degrees("rows")

    def total_weight(self):
        return self.adjacency.total()

    def undirected(self):
        """Self if already undirected, else the symmetrized copy."""
        if not self.directed:
            return self
        return Graph(self.adjacency.symmetrize(), directed=False,
                     names=self.names)

    def validate(self):
        self.adjacency.validate()
        if not self.directed:
            t = self.adjacency.transpose()
            same = (np.array_equal(t.indptr, self.adjacency.indptr)
                    and np.array_equal(t.indices, self.adjacency.indices)
                    and np.array_equal(t.data, self.adjacency.data))
            if not same:
                raise ConstructionError(
                    "undirected graph requires a symmetric adjacency")

    def name_of(self, i):
        return self.names[i] if self.names is not None else str(i)

    def __repr__(self):
        kind = "directed" if self.directed else "undirected"
        return f"Graph(n={self.n}, m={self.m}, {kind})"


class BipartiteGraph:
    """Biadjacency wrapper: rows and columns are distinct node sets."""

    def __init__(self, biadjacency, row_names=None, col_names=None):
        self.biadjacency = biadjacency
        self.row_names = None if row_names is None else list(row_names)
        self.col_names = None if col_names is None else list(col_names)
        if (self.row_names is not None
                and len(self.row_names) != biadjacency.n_rows):
            raise DimensionError("row_names length must equal row count")
        if (self.col_names is not None
                and len(self.col_names) != biadjacency.n_cols):
            raise DimensionError("col_names length must equal column count")

    @property
    def n_rows(self):
        return self.biadjacency.n_rows

    @property
    def n_cols(self):
        return self.biadjacency.n_cols

    @property
    def m(self):
        return self.biadjacency.nnz

    def __repr__(self):
        return (f"BipartiteGraph({self.n_rows}x{self.n_cols}, "
                f"m={self.m})")
