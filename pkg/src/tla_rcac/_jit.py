"""Optional numba acceleration for the hot kernels.

Set ``TLA_RCAC_DISABLE_JIT=1`` to run every kernel as plain numpy/Python.
Both paths execute the same source, so results agree to rounding.
"""
import os

_FLAG = os.environ.get("TLA_RCAC_DISABLE_JIT", "").strip().lower()
JIT_DISABLED = _FLAG in ("1", "true", "yes", "on")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

JIT_ENABLED = numba is not None and not JIT_DISABLED


def njit(fn=None, *, cache=True):
    """``numba.njit(cache=...)`` when enabled, identity otherwise.

    Kernels taking a jitted callable as an argument must use ``cache=False``:
    numba cannot reliably persist signatures that embed a dispatcher type.
    """
    if fn is None:
        return lambda f: njit(f, cache=cache)
    if not JIT_ENABLED:
        return fn
    return numba.njit(cache=cache)(fn)


def python_impl(fn):
    """Return the interpreted version of a (possibly) jitted function."""
    return getattr(fn, "py_func", fn)


def is_jitted(fn):
    return JIT_ENABLED and hasattr(fn, "py_func")
