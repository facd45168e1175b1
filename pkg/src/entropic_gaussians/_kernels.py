"""Select the Sinkhorn kernel backend at import time.

The compiled extension is used when it was built; setting the environment
variable ``ENTROPIC_GAUSSIANS_PURE_PYTHON=1`` forces the NumPy fallback.
"""
import os

from . import _sinkhorn_py

BACKEND = "python"
softmin_rows = _sinkhorn_py.softmin_rows
softmin_cols = _sinkhorn_py.softmin_cols

if not os.environ.get("ENTROPIC_GAUSSIANS_PURE_PYTHON"):
    try:
        from . import _sinkhorn_ext
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        softmin_rows = _sinkhorn_ext.softmin_rows
        softmin_cols = _sinkhorn_ext.softmin_cols


def backends():
    """Map of every importable backend name to its ``(rows, cols)`` pair."""
    found = {"python": (_sinkhorn_py.softmin_rows, _sinkhorn_py.softmin_cols)}
    try:
        from . import _sinkhorn_ext
    except ImportError:
        return found
    found["cython"] = (_sinkhorn_ext.softmin_rows, _sinkhorn_ext.softmin_cols)
    return found
