"""Kernel backend selection.

The package ships two interchangeable kernel sets: a compiled extension
(``_native``, Cython + OpenMP) and a pure-numpy fallback (``_python``).
The native one is preferred when the extension built; selection can be
forced with the ``SKNET_KERNEL`` environment variable or ``use_backend``.
Both produce bit-identical results.
"""

import os

from .. import errors
from . import _python

try:
    from . import _native
except ImportError:
    _native = None

_BACKENDS = {"python": _python}
if _native is not None:
    _BACKENDS["native"] = _native


def machine_parallelism():
    """CPUs actually available to this process."""
    try:
        return len(os.sched_getaffinity(0)) or 1
    except AttributeError:
        return os.cpu_count() or 1


_active = None
_num_threads = machine_parallelism()


def available_backends():
    """Names of the kernel backends importable in this environment."""
    return sorted(_BACKENDS)


def use_backend(name):
    """Select the kernel backend: 'native', 'python' or 'auto'."""
    global _active
    if name == "auto":
        _active = _BACKENDS.get("native", _python)
        return
    if name not in _BACKENDS:
        raise errors.ParameterError(
            f"unknown kernel backend {name!r}; available: {available_backends()}")
    _active = _BACKENDS[name]


def active_backend():
    """The module object implementing the selected kernels."""
    return _active


def backend_name():
    return _active.NAME


def set_num_threads(n):
    """Worker count for row-parallel kernels (results do not depend on it)."""
    global _num_threads
    n = int(n)
    if n < 1:
        raise errors.ParameterError("thread count must be >= 1")
    _num_threads = n


def get_num_threads():
    return _num_threads


use_backend(os.environ.get("SKNET_KERNEL", "auto"))
