"""Numba switch.

Set ``SYMVORT_DISABLE_NUMBA=1`` to run every hot kernel through the pure-numpy
backend instead. The flag is read once at import time.
"""
import os

_DISABLED = os.environ.get("SYMVORT_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")


def numba_available():
    """True when numba can be imported, regardless of the env flag."""
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


HAS_NUMBA = not _DISABLED and numba_available()
