"""Optional numba acceleration.

Set ``TROTTERLAB_NO_NUMBA=1`` to force the pure-numpy code paths. If numba
is not importable the numpy paths are used as well.
"""
import os

_disabled = os.environ.get("TROTTERLAB_NO_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _disabled:
        raise ImportError("numba disabled by TROTTERLAB_NO_NUMBA")
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        # bare decorator or decorator factory, mirroring numba.njit
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn

        return wrap

    prange = range


def backend():
    return "numba" if HAVE_NUMBA else "numpy"
