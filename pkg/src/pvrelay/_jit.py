"""Optional numba acceleration.

Set ``PVRELAY_DISABLE_NUMBA=1`` to force the pure-numpy kernels, e.g. when
debugging or when numba is unavailable for the interpreter in use.
"""
import os

_FLAG = os.environ.get("PVRELAY_DISABLE_NUMBA", "").strip().lower()
DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    import numba as _numba
except ImportError:  # pragma: no cover - exercised only without numba
    _numba = None

HAVE_NUMBA = _numba is not None
USE_NUMBA = HAVE_NUMBA and not DISABLED


def njit(func):
    """``numba.njit(cache=True)`` when numba is importable, else identity."""
    if _numba is None:  # pragma: no cover
        return func
    return _numba.njit(cache=True)(func)
