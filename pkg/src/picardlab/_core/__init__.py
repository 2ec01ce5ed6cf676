"""Numerical kernels for branch-tracked integrands.

The compiled module ``_tracking`` is used when it was built; otherwise the
numpy implementation in :mod:`._tracking_py` is selected at import.  Both
expose the same functions with identical semantics.
"""

from __future__ import annotations

import os

from . import _tracking_py

try:  # pragma: no cover - depends on the build
    if os.environ.get("PICARDLAB_PURE_PYTHON"):
        raise ImportError("pure-Python kernels forced by environment")
    from . import _tracking as _compiled
except ImportError:  # pragma: no cover
    _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _tracking_py

tracked_log_sum = _impl.tracked_log_sum
lift_phases = _impl.lift_phases

__all__ = ["BACKEND", "tracked_log_sum", "lift_phases", "_tracking_py"]
