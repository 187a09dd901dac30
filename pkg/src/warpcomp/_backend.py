"""Backend selection for the compiled hot loops.

The shooting integrator in :mod:`warpcomp.spectrum` is a sequential scalar
recurrence, which is the one place in the package where plain Python is too
slow.  When numba is importable the kernels in :mod:`warpcomp._kernels` are
compiled with ``@njit``; otherwise (or when ``VERIFY_BACKEND=numpy`` is set in
the environment) a pure numpy/Python twin with identical semantics is used.

``VERIFY_BACKEND`` values:

* ``numba`` : require the compiled path, raise if numba is missing;
* ``numpy`` : force the fallback path even when numba is present;
* unset    : use numba when available, fall back silently otherwise.
"""

import os

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        """Stand-in decorator that returns the function unchanged."""

        def wrap(func):
            return func

        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return wrap


_choice = os.environ.get("VERIFY_BACKEND", "").strip().lower()
if _choice == "numba" and not HAS_NUMBA:
    raise ImportError("VERIFY_BACKEND=numba requested but numba is not importable")

USE_NUMBA = HAS_NUMBA and _choice != "numpy"


def backend_name():
    """Name of the active kernel backend, ``"numba"`` or ``"numpy"``."""
    return "numba" if USE_NUMBA else "numpy"
