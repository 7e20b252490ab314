"""Quadrature kernels for the nonlocal operators.

The compiled extension ``_ckernels`` is used when it was built; otherwise the
NumPy fallback ``_pykernels`` is used. Set ``HELEGRAPH_KERNELS=python`` to force
the fallback.
"""

import os

import numpy as np

from . import _pykernels

try:
    if os.environ.get("HELEGRAPH_KERNELS", "").lower() == "python":
        raise ImportError("fallback requested")
    from . import _ckernels as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"


def backend(name=None):
    """Return the kernel module by name (``cython``/``python``), default the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


def _c(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def linear_sum(u, du, wkp, wkm, hc):
    return _impl.linear_sum(_c(u), _c(du), _c(wkp), _c(wkm), _c(hc))


def extremal_sum(u, wk, lam_pos, lam_neg):
    return _impl.extremal_sum(_c(u), _c(wk), float(lam_pos), float(lam_neg))


def muskat_sum(f, df, dx, diag):
    return _impl.muskat_sum(_c(f), _c(df), float(dx), _c(diag))


def muskat_window_sum(f, df, x, diag):
    return _impl.muskat_window_sum(_c(f), _c(df), _c(x), _c(diag))
