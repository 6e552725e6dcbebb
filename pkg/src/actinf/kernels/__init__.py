"""Backend selection for the hot numeric kernels.

Two interchangeable implementations exist: ``_numba`` (jitted loops, the
default whenever numba imports) and ``_numpy`` (vectorized fallback).  Set
``ACTINF_BACKEND=numpy`` or ``ACTINF_BACKEND=numba`` before import to force
one; unset or ``auto`` picks numba when available.  Engine code reads
``kernels.active`` at call time, so ``select_backend`` also works at
runtime (used by the equivalence tests and the benchmark).
"""

import os

import numpy as np

from . import _numpy as numpy_backend

try:
    from . import _numba as numba_backend
except ImportError:
    numba_backend = None

BACKEND_ENV = "ACTINF_BACKEND"


def _resolve(name):
    name = (name or "auto").strip().lower()
    if name == "numpy":
        return numpy_backend
    if name == "numba":
        if numba_backend is None:
            raise RuntimeError("numba backend requested but numba is not importable")
        return numba_backend
    if name == "auto":
        return numba_backend if numba_backend is not None else numpy_backend
    raise ValueError(f"unknown kernel backend {name!r} (expected numpy|numba|auto)")


active = _resolve(os.environ.get(BACKEND_ENV, "auto"))


def backend_name():
    return active.NAME


def select_backend(name):
    """Switch the active backend; returns the name of the previous one."""
    global active
    previous = active.NAME
    active = _resolve(name)
    return previous


def pack_factors(factor_list, dims):
    """Pad per-axis factor vectors into the (ndim, maxdim) array kernels take."""
    ndim = len(dims)
    packed = np.zeros((ndim, int(max(dims))))
    for ax, f in enumerate(factor_list):
        packed[ax, :len(f)] = f
    return packed
