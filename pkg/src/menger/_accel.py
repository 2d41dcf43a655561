"""Optional numba acceleration.

Set ``MENGER_NUMBA=0`` in the environment to force the pure-numpy kernels.
"""
import os

_flag = os.environ.get("MENGER_NUMBA", "1").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

USE_NUMBA = numba is not None and _flag not in ("0", "false", "no", "off")


def njit(func):
    """``numba.njit(cache=True)`` when numba is present, else identity."""
    if numba is None:
        return func
    return numba.njit(cache=True)(func)
