"""Backend switch for the hot loops.

Set ``REPELLING_NUMBA=0`` to force the pure-numpy path.  When numba is not
importable the numpy path is used regardless of the flag.
"""
import os

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn
        return wrap


def _flag():
    value = os.environ.get("REPELLING_NUMBA", "1").strip().lower()
    return value not in ("0", "false", "no", "off")


USE_NUMBA = HAVE_NUMBA and _flag()


def backend():
    """Name of the active loop backend."""
    return "numba" if USE_NUMBA else "numpy"


def set_backend(name):
    """Switch backends at runtime (used by the benchmark and the tests)."""
    global USE_NUMBA
    if name == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba is not installed")
        USE_NUMBA = True
    elif name == "numpy":
        USE_NUMBA = False
    else:
        raise ValueError(f"unknown backend {name!r}")
