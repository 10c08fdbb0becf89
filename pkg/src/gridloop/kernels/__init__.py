"""Kernel backend selection.

Prefers the compiled extension; falls back to the pure-Python implementation
when the extension was not built. Both expose the same functions with
bit-identical results (see tests/test_kernels.py). Set GRIDLOOP_PURE=1 to
force the fallback.
"""

from __future__ import annotations

import os

if os.environ.get("GRIDLOOP_PURE"):
    from gridloop.kernels import _pure as _impl
else:
    try:
        from gridloop.kernels import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        from gridloop.kernels import _pure as _impl

cast_rays = _impl.cast_rays
clear_distance = _impl.clear_distance
dijkstra_grid = _impl.dijkstra_grid


def backend_name() -> str:
    return _impl.BACKEND
