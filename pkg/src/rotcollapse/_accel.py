"""Backend selection for the hot kernels.

Every kernel in ``_kernels`` has a plain Python/NumPy implementation and,
when numba is importable and not disabled, an ``@njit``-compiled twin.
Set ``ROTC_NUMBA=0`` (or ``off``/``false``) to force the fallback path,
e.g. on platforms where numba is unavailable.  ``bench/bench_backends.py``
times both paths side by side.
"""

import os

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    _HAVE_NUMBA = False


def _numba_requested() -> bool:
    flag = os.environ.get("ROTC_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "off", "no")


NUMBA_ENABLED = _HAVE_NUMBA and _numba_requested()


def jit_kernel(fn):
    """Compile fn with numba on the accelerated path, return fn unchanged otherwise."""
    if NUMBA_ENABLED:
        return numba.njit(cache=True)(fn)
    return fn


def compile_kernel(fn):
    """Always return the numba-compiled version of fn (for benchmarking)."""
    if not _HAVE_NUMBA:
        raise RuntimeError("numba is not available")
    return numba.njit(cache=True)(fn)
