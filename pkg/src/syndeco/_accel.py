"""Backend selection for the numeric kernels.

Kernels are compiled with numba when it is importable.  Setting the
environment variable ``SYNDECO_DISABLE_NUMBA=1`` before import forces the
pure-numpy implementations instead.
"""
import os

try:
    from numba import njit as _njit
    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover
    _njit = None
    NUMBA_AVAILABLE = False

_DISABLE_FLAG = "SYNDECO_DISABLE_NUMBA"

USE_NUMBA = NUMBA_AVAILABLE and os.environ.get(_DISABLE_FLAG, "").strip().lower() not in (
    "1",
    "true",
    "yes",
    "on",
)


def optional_njit(func):
    """Compile ``func`` with numba if available, else return it unchanged."""
    if NUMBA_AVAILABLE:
        return _njit(cache=True)(func)
    return func


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
