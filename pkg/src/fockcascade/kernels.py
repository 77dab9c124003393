"""Select the compiled kernels when available, else the numpy fallback.

Set ``FOCKCASCADE_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
if os.environ.get("FOCKCASCADE_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
else:
    _impl = _kernels_py

aberth = _impl.aberth
walk_shots = _impl.walk_shots
