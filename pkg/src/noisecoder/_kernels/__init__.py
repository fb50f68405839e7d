"""Kernel dispatch: compiled extension when available, numpy otherwise.

NOISECODER_PURE_PYTHON=1 forces the numpy path (useful for benchmarking and
for debugging suspected kernel issues).
"""

from __future__ import annotations

import os

from . import gmm_numpy

if os.environ.get("NOISECODER_PURE_PYTHON"):
    gmm_denoise_kernel = gmm_numpy.denoise
    KERNEL_BACKEND = "numpy (forced)"
else:
    try:
        from . import _gmm

        gmm_denoise_kernel = _gmm.denoise
        KERNEL_BACKEND = "compiled"
    except ImportError:
        gmm_denoise_kernel = gmm_numpy.denoise
        KERNEL_BACKEND = "numpy"

__all__ = ["gmm_denoise_kernel", "KERNEL_BACKEND", "gmm_numpy"]
