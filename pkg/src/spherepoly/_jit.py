"""Switch between numba-compiled kernels and the plain Python/numpy path.

Set ``SPHEREPOLY_DISABLE_JIT=1`` before importing the package to run every
kernel uninterpreted.  The fallback is slow but useful for debugging and as a
cross-check of the compiled path.
"""

import os

_FLAG = os.environ.get("SPHEREPOLY_DISABLE_JIT", "").strip().lower()
JIT_DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

USE_NUMBA = numba is not None and not JIT_DISABLED

JIT_OPTIONS = {"nogil": True, "cache": True, "error_model": "numpy"}


def njit(*args, **kwargs):
    """``numba.njit`` when enabled, identity decorator otherwise."""
    if USE_NUMBA:
        opts = {**JIT_OPTIONS, **kwargs}
        if len(args) == 1 and callable(args[0]):
            return numba.njit(**opts)(args[0])
        return numba.njit(*args, **opts)
    if len(args) == 1 and callable(args[0]):
        return args[0]
    return lambda func: func


if numba is not None:
    objmode = numba.objmode
else:  # pragma: no cover
    from contextlib import nullcontext

    def objmode(**_types):
        return nullcontext()


def backend():
    return "numba" if USE_NUMBA else "python"
