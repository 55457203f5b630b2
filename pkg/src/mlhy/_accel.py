"""Switch between numba-compiled kernels and their pure-numpy fallbacks.

Set ``MLHY_NUMBA=0`` in the environment before importing :mod:`mlhy` to run
every hot loop as plain Python/numpy. The flag is read once at import time.
"""

import os

_FLAG = os.environ.get("MLHY_NUMBA", "1").strip().lower()
NUMBA_ENABLED = _FLAG not in ("0", "false", "no", "off")

if NUMBA_ENABLED:
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover - numba is a hard dependency
        NUMBA_ENABLED = False


def jit(fn=None, **kwargs):
    """``numba.njit`` when acceleration is enabled, identity otherwise."""
    opts = {"cache": True, "nogil": True}
    opts.update(kwargs)

    def wrap(f):
        if NUMBA_ENABLED:
            return _njit(**opts)(f)
        return f

    if fn is None:
        return wrap
    return wrap(fn)


def select(accelerated, fallback):
    """Pick the compiled loop kernel or the vectorized numpy variant."""
    return jit(accelerated) if NUMBA_ENABLED else fallback
