"""Backend switch for the compiled kernels.

Set ``STARKWELL_DISABLE_JIT=1`` to run the pure numpy/Python path even when
numba is installed. The flag is read once, at import time.
"""

import os

_DISABLED = os.environ.get("STARKWELL_DISABLE_JIT", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    import numba

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    NUMBA_AVAILABLE = False

USE_JIT = NUMBA_AVAILABLE and not _DISABLED


def njit(func):
    """Compile ``func`` with numba when the JIT backend is active.

    With the backend disabled the function is returned untouched, so every
    kernel also runs as ordinary Python (and on numpy arrays, for the ones
    written elementwise).
    """
    if not USE_JIT:
        return func
    return numba.njit(cache=True)(func)


def backend_name():
    return "numba" if USE_JIT else "numpy"
