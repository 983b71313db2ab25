"""Kernel selection: the compiled extension when built, else pure Python.

Set ``LOGCHOW_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("LOGCHOW_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

coset_points = _impl.coset_points
orthant_rays = _impl.orthant_rays
twistable_points = _impl.twistable_points


def thread_cap() -> int:
    """Worker cap from ``LOGCHOW_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("LOGCHOW_THREADS", "1")))
    except ValueError:
        return 1
