"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback. Set ``MIXPHASE_PURE_PYTHON=1`` to force the fallback.
"""
import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("MIXPHASE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # pragma: no cover - depends on build
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"


def _c(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


def cumulative_products(steps, start=None):
    steps = _c(steps)
    if start is None:
        start = np.eye(steps.shape[1], dtype=np.complex128)
    return _impl.cumulative_products(steps, _c(start))


def node_expectations(unitaries, generators, vectors):
    return _impl.node_expectations(_c(unitaries), _c(generators), _c(vectors))


def evolve_vector(steps, psi0):
    return _impl.evolve_vector(_c(steps), _c(psi0))
