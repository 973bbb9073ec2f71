"""Kernel backend selection.

The compiled Cython module is used when it imports; otherwise the NumPy
fallback.  ``CLUSTERBOUND_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _jacobi_py

try:
    if os.environ.get("CLUSTERBOUND_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python backend requested")
    from . import _jacobi as _compiled
except ImportError:
    _compiled = None

BACKENDS = {"python": _jacobi_py}
if _compiled is not None:
    BACKENDS["cython"] = _compiled

DEFAULT = "cython" if _compiled is not None else "python"


def get(name=None):
    """Return the kernel module for ``name`` (default backend when None)."""
    key = DEFAULT if name is None else name
    try:
        return BACKENDS[key]
    except KeyError:
        raise ValueError(f"backend {key!r} is not available; have {sorted(BACKENDS)}") from None
