"""Optional numba acceleration.

Set ``COLLATZ_ERGODIC_NO_NUMBA=1`` to force the pure-numpy path; the same
kernel source runs uncompiled in that case.
"""
import os

try:
    from numba import njit
    numba_installed = True
except ImportError:  # pragma: no cover
    numba_installed = False

NUMBA_ENABLED = numba_installed and os.environ.get(
    "COLLATZ_ERGODIC_NO_NUMBA", "").lower() not in ("1", "true", "yes")


def optional_njit(*args, **kwargs):
    def decorator(func):
        if NUMBA_ENABLED:
            return njit(*args, **kwargs)(func)
        return func
    return decorator


def python_impl(func):
    """Uncompiled version of a kernel, whichever mode is active."""
    return getattr(func, "py_func", func)
