"""Optional numba acceleration.

Set ``QPGSTREAK_DISABLE_NUMBA=1`` to force the pure-numpy kernels. If numba
is not importable the numpy path is used regardless of the flag.
"""
import os

_DISABLED = os.environ.get("QPGSTREAK_DISABLE_NUMBA", "").strip().lower() in {
    "1", "true", "yes", "on",
}

try:
    if _DISABLED:
        raise ImportError("numba disabled by QPGSTREAK_DISABLE_NUMBA")
    from numba import njit as _numba_njit

    USE_NUMBA = True
except ImportError:
    USE_NUMBA = False
    _numba_njit = None


def njit(*args, **kwargs):
    """``numba.njit`` with caching, or the identity decorator."""
    if not USE_NUMBA:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return _numba_njit(*args, **kwargs)
