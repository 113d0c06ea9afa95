"""Kernel selection.

The compiled Cython kernels are used when importable; otherwise the numpy
fallback.  Set ``BIASTOL_BACKEND=python`` to force the fallback.
"""
from __future__ import annotations

import logging
import os

log = logging.getLogger(__name__)

_forced = os.environ.get("BIASTOL_BACKEND", "").strip().lower()

if _forced == "python":
    from biastol import _kernels_py as kernels

    BACKEND = "python"
else:
    try:
        from biastol import _kernels as kernels  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        from biastol import _kernels_py as kernels

        BACKEND = "python"
        if _forced == "cython":
            raise
        log.debug("compiled kernels unavailable, using numpy fallback")

betainc = kernels.betainc
betainc_array = kernels.betainc_array
gammainc = kernels.gammainc
gammainc_array = kernels.gammainc_array

__all__ = ["BACKEND", "betainc", "betainc_array", "gammainc", "gammainc_array"]
