"""Hot numeric kernels, each with a numba and a pure-numpy implementation.

The public names ``csr_spmm`` and ``edge_smoothness`` dispatch on
:data:`arcgad._accel.HAVE_NUMBA`. The ``*_numba`` / ``*_numpy`` variants stay
importable so tests and the benchmark can compare them directly.
"""
import numpy as np

from ._accel import HAVE_NUMBA, njit, prange


# ---------------------------------------------------------------------------
# CSR sparse x dense
# ---------------------------------------------------------------------------


@njit(cache=True, parallel=True)
def _csr_spmm_kernel(indptr, indices, data, x, out):
    n = indptr.shape[0] - 1
    d = x.shape[1]
    for i in prange(n):
        for j in range(d):
            out[i, j] = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            col = indices[p]
            v = data[p]
            for j in range(d):
                out[i, j] += v * x[col, j]
    return out


def csr_spmm_numba(indptr, indices, data, x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty((indptr.shape[0] - 1, x.shape[1]), dtype=np.float64)
    return _csr_spmm_kernel(indptr, indices, data, x, out)


def csr_spmm_numpy(indptr, indices, data, x):
    x = np.asarray(x, dtype=np.float64)
    n = indptr.shape[0] - 1
    rows = np.repeat(np.arange(n), np.diff(indptr))
    out = np.zeros((n, x.shape[1]), dtype=np.float64)
    np.add.at(out, rows, data[:, None] * x[indices])
    return out


# ---------------------------------------------------------------------------
# Per-column edge smoothness
# ---------------------------------------------------------------------------


@njit(cache=True)
def _edge_smoothness_kernel(src, dst, x, out):
    m = src.shape[0]
    d = x.shape[1]
    for k in range(d):
        out[k] = 0.0
    for e in range(m):
        a = src[e]
        b = dst[e]
        for k in range(d):
            diff = x[a, k] - x[b, k]
            out[k] += diff * diff
    for k in range(d):
        out[k] = -out[k] / m
    return out


def edge_smoothness_numba(src, dst, x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty(x.shape[1], dtype=np.float64)
    return _edge_smoothness_kernel(src, dst, x, out)


def edge_smoothness_numpy(src, dst, x):
    x = np.asarray(x, dtype=np.float64)
    diff = x[src] - x[dst]
    return -np.einsum("ij,ij->j", diff, diff) / src.shape[0]


def sym_eigh(a):
    """Ascending eigenpairs of a symmetric matrix (LAPACK in both backends).

    A numba Jacobi solver was 15-150x slower than LAPACK from 64x64 up, so
    this is not a kernel with two variants.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return np.linalg.eigh(0.5 * (a + a.T))


if HAVE_NUMBA:
    csr_spmm = csr_spmm_numba
    edge_smoothness = edge_smoothness_numba
else:
    csr_spmm = csr_spmm_numpy
    edge_smoothness = edge_smoothness_numpy
