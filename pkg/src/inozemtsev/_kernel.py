"""Select the theta-series backend at import time.

The compiled extension is used when it imports; ``INO_PURE_PYTHON=1`` forces
the numpy fallback.
"""

from __future__ import annotations

import os

from . import _theta_py

python_theta_series = _theta_py.theta_series

try:
    if os.environ.get("INO_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure python requested")
    from ._ctheta import theta_series as compiled_theta_series  # type: ignore[import-not-found]

    theta_series = compiled_theta_series
    BACKEND = "cython"
except ImportError:
    compiled_theta_series = None
    theta_series = python_theta_series
    BACKEND = "python"

__all__ = ["BACKEND", "theta_series", "python_theta_series", "compiled_theta_series"]
