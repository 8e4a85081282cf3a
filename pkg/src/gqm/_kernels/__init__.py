"""Kernel backend selection.

The compiled Cython kernel is used when it imported cleanly; otherwise the
pure numpy twin takes over.  Set the environment variable GQM_DISABLE_EXT=1
before import to force the pure backend (useful for parity tests and
benchmarks).
"""

import os

from . import pure as _pure

if os.environ.get("GQM_DISABLE_EXT", "").strip() in ("1", "true", "yes"):
    _impl = _pure
else:
    try:
        from . import _flowext as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _pure

rk4_chart_flow = _impl.rk4_chart_flow
chart_velocity = _impl.chart_velocity


def backend_name() -> str:
    """Name of the active kernel backend: "cython" or "python"."""
    return _impl.BACKEND


def backends():
    """All importable kernel backends, keyed by name (for parity tests)."""
    out = {"python": _pure}
    try:
        from . import _flowext
        out["cython"] = _flowext
    except ImportError:
        pass
    return out
