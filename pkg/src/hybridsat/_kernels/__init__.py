"""Hot kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import from ``HYBRIDSAT_BACKEND``
(``numba`` or ``numpy``; default ``numba``). If numba cannot be imported the
numpy path is used. Both implementations stay importable as
``numba_backend()`` / ``numpy_backend()`` so they can be compared.
"""

from __future__ import annotations

import os
import warnings

from . import numpy_impl

BACKEND_ENV = "HYBRIDSAT_BACKEND"

KERNELS = (
    "first_violated_batch",
    "count_models",
    "walk_batch",
    "walk_batch_shared",
    "transition_table",
    "table_walk_shared",
    "suffix_counts",
    "coupled_batch",
)


def numpy_backend():
    return numpy_impl


def numba_backend():
    from . import numba_impl

    return numba_impl


def _select():
    requested = os.environ.get(BACKEND_ENV, "numba").strip().lower() or "numba"
    if requested not in ("numba", "numpy"):
        raise ValueError(f"{BACKEND_ENV} must be 'numba' or 'numpy', got {requested!r}")
    if requested == "numpy":
        return "numpy", numpy_impl
    try:
        return "numba", numba_backend()
    except ImportError:  # pragma: no cover - numba is a declared dependency
        warnings.warn("numba unavailable, falling back to numpy kernels", RuntimeWarning)
        return "numpy", numpy_impl


BACKEND, _impl = _select()

first_violated_batch = _impl.first_violated_batch
count_models = _impl.count_models
walk_batch = _impl.walk_batch
walk_batch_shared = _impl.walk_batch_shared
transition_table = _impl.transition_table
table_walk_shared = _impl.table_walk_shared
suffix_counts = _impl.suffix_counts
coupled_batch = _impl.coupled_batch
