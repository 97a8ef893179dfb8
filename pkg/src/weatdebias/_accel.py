"""Backend selection for the numeric kernels.

Kernels come in two flavours: a numba ``@njit`` version and a pure-numpy
version.  The numba path is used when numba imports cleanly and the
environment variable ``WEATDEBIAS_DISABLE_NUMBA`` is unset (or ``0``).
"""

import os

_DISABLED = os.environ.get("WEATDEBIAS_DISABLE_NUMBA", "0").strip().lower() not in (
    "",
    "0",
    "false",
    "no",
)

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn


_backend = "numba" if (HAS_NUMBA and not _DISABLED) else "numpy"


def get_backend():
    return _backend


def set_backend(name):
    """Switch the kernel backend at runtime ("numba" or "numpy")."""
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba is not installed")
    _backend = name


def use_numba():
    return _backend == "numba"
