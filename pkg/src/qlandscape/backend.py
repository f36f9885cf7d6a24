"""Kernel backend selection.

The compiled extension is preferred when importable; otherwise the numpy
implementation is used.  Set ``QLANDSCAPE_KERNELS=python`` to force the
fallback (used by the benchmark and for debugging).
"""

import os

from . import _kernels_py

_requested = os.environ.get("QLANDSCAPE_KERNELS", "auto").lower()

if _requested in ("python", "numpy"):
    kernels = _kernels_py
    BACKEND = "python"
elif _requested in ("auto", "compiled", "cython", ""):
    try:
        from . import _kernels as _compiled

        kernels = _compiled
        BACKEND = "compiled"
    except ImportError:
        kernels = _kernels_py
        BACKEND = "python"
else:
    raise ValueError(f"unknown QLANDSCAPE_KERNELS value: {_requested!r}")


def backend_name() -> str:
    """Name of the active kernel backend: 'compiled' or 'python'."""
    return BACKEND
