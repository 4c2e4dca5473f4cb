"""
Optional numba acceleration.

Every kernel is written as plain Python over numpy arrays and compiled with
``numba.njit`` when available. Setting ``GAARCH_DISABLE_NUMBA=1`` keeps the
plain-Python versions, which is useful for debugging and for checking that
both paths agree.
"""

from __future__ import annotations

import os

DISABLE_NUMBA = os.environ.get("GAARCH_DISABLE_NUMBA", "0").lower() in ("1", "true", "yes")

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and not DISABLE_NUMBA


def jit(func):
    """Compile ``func`` in nopython mode if numba is enabled, else return it."""
    if not USE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)

