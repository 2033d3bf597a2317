"""Backend selection for the hot kernels.

Set ``MTMLAB_DISABLE_NUMBA=1`` to force the pure-numpy path. The numba path is
also skipped when numba cannot be imported.
"""
import os

_FLAG = os.environ.get("MTMLAB_DISABLE_NUMBA", "").strip().lower()
_DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError("numba disabled by MTMLAB_DISABLE_NUMBA")
    from numba import njit as _njit

    HAS_NUMBA = True
except ImportError:
    _njit = None
    HAS_NUMBA = False


def njit(func):
    """``numba.njit(cache=True)`` when available, else ``func`` unchanged."""
    if HAS_NUMBA:
        return _njit(cache=True)(func)
    return func


BACKEND = "numba" if HAS_NUMBA else "numpy"
