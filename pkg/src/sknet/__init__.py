"""sknet: sparse CSR graph analysis toolkit.

Graphs are carried as CSR adjacency (or biadjacency) matrices. Hot
kernels run on a compiled backend when available and on a bit-identical
numpy fallback otherwise; see :mod:`sknet._kernels`.
"""

from ._kernels import (available_backends, backend_name, get_num_threads,
                       set_num_threads, use_backend)
from .sparse import (BipartiteGraph, CsrMatrix, Graph, RegularizedOperator,
                     TransposedOperator, degrees, from_edge_list, matvec,
                     normalize_rows, regularized_op, symmetrize, transpose)

__version__ = "0.1.0"

__all__ = [
    "BipartiteGraph", "CsrMatrix", "Graph", "RegularizedOperator",
    "TransposedOperator", "available_backends", "backend_name", "degrees",
    "from_edge_list", "get_num_threads", "matvec", "normalize_rows",
    "regularized_op", "set_num_threads", "symmetrize", "transpose",
    "use_backend", "__version__",
]
