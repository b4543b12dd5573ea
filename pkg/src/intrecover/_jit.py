"""Optional numba acceleration.

Set INTRECOVER_DISABLE_JIT=1 to run every kernel through its pure Python/numpy
path instead (useful for debugging and for the fallback benchmark).
"""
import os

JIT_ENABLED = os.environ.get("INTRECOVER_DISABLE_JIT", "").strip().lower() not in ("1", "true", "yes")

if JIT_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        JIT_ENABLED = False

if not JIT_ENABLED:
    def njit(func=None, **kwargs):
        if func is not None:
            return func

        def wrapper(f):
            return f
        return wrapper
