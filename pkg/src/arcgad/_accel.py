"""Backend selection for the compiled kernels.

Numba is used when it imports cleanly and ``ARCGAD_DISABLE_NUMBA`` is not set
to a truthy value. Every kernel in :mod:`arcgad.kernels` has a pure-numpy twin,
so the package stays usable without a compiler.
"""
import os

_FLAG = os.environ.get("ARCGAD_DISABLE_NUMBA", "").strip().lower()
_DISABLED = _FLAG in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError("numba disabled by ARCGAD_DISABLE_NUMBA")
    import numba
    from numba import njit, prange

    if "NUMBA_THREADING_LAYER" not in os.environ:
        # skip the TBB probe, which warns on older system TBB builds
        numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        # bare @njit and @njit(...) both become no-ops
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn

        return wrap

    prange = range


def backend():
    return "numba" if HAVE_NUMBA else "numpy"
