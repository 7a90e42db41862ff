"""Integrator backend selection.

The compiled kernel is used when it was built; otherwise the pure-Python
version is used.  ``LAPLACE_TODA_PURE=1`` forces the fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
integrate_fourier_matrix = _kernels_py.integrate_fourier_matrix

if os.environ.get("LAPLACE_TODA_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # not built
        _compiled = None
    if _compiled is not None:
        BACKEND = "cython"
        integrate_fourier_matrix = _compiled.integrate_fourier_matrix

__all__ = ["BACKEND", "integrate_fourier_matrix"]
