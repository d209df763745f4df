"""Both kernel backends must agree with each other and with dense oracles."""
import numpy as np
import pytest

from arcgad import _accel, kernels
from arcgad.graph import EdgeList, build_csr, normalize_adjacency


def _graph(rng, n):
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < 0.2
    return normalize_adjacency(build_csr(EdgeList.from_pairs(np.stack([iu[keep], ju[keep]], 1), n)))


def test_backend_flag_is_reported():
    assert kernels.csr_spmm is (kernels.csr_spmm_numba if _accel.HAVE_NUMBA else kernels.csr_spmm_numpy)
    assert _accel.backend() in ("numba", "numpy")


@pytest.mark.parametrize("n", [1, 5, 40])
def test_spmm_backends_agree(rng, n):
    g = _graph(rng, n)
    x = rng.normal(size=(n, 3))
    a = kernels.csr_spmm_numba(g.indptr, g.indices, g.data, x)
    b = kernels.csr_spmm_numpy(g.indptr, g.indices, g.data, x)
    assert np.abs(a - b).max() <= 1e-12
    assert np.abs(a - g.to_dense() @ x).max() <= 1e-12


def test_smoothness_backends_agree(rng):
    src = rng.integers(0, 30, 100)
    dst = rng.integers(0, 30, 100)
    x = rng.normal(size=(30, 7))
    a = kernels.edge_smoothness_numba(src, dst, x)
    b = kernels.edge_smoothness_numpy(src, dst, x)
    assert np.abs(a - b).max() <= 1e-12


def test_sym_eigh(rng):
    m = rng.normal(size=(6, 6))
    a = m + m.T
    w, v = kernels.sym_eigh(a)
    assert np.all(np.diff(w) >= 0)
    assert np.abs(a @ v - v * w).max() <= 1e-12
    with pytest.raises(ValueError):
        kernels.sym_eigh(np.ones((2, 3)))
