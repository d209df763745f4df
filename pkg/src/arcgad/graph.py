"""Undirected graph storage, GCN-style normalization and propagation."""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .autograd import Tensor, tensor
from .errors import DimensionError, ValidationError


@dataclass(frozen=True)
class EdgeList:
    """Canonical undirected edge set: ``pairs[:, 0] < pairs[:, 1]``, sorted, unique."""

    pairs: np.ndarray
    n_nodes: int

    @classmethod
    def from_pairs(cls, pairs, n_nodes):
        n_nodes = int(n_nodes)
        if n_nodes < 0:
            raise ValidationError(f"n_nodes must be non-negative, got {n_nodes}")
        arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= n_nodes):
            bad = arr[(arr < 0).any(axis=1) | (arr >= n_nodes).any(axis=1)][0]
            raise ValidationError(
                f"edge ({bad[0]}, {bad[1]}) out of range for {n_nodes} nodes"
            )
        arr = np.sort(arr, axis=1)
        arr = arr[arr[:, 0] != arr[:, 1]]
        arr = np.unique(arr, axis=0) if arr.size else np.zeros((0, 2), dtype=np.int64)
        arr.setflags(write=False)
        return cls(arr, n_nodes)

    @property
    def n_edges(self):
        return self.pairs.shape[0]

    def __len__(self):
        return self.pairs.shape[0]

    def union(self, other_pairs):
        extra = np.asarray(other_pairs, dtype=np.int64).reshape(-1, 2)
        return EdgeList.from_pairs(np.vstack([self.pairs, extra]), self.n_nodes)


@dataclass(frozen=True)
class SparseGraph:
    """Square CSR matrix with a symmetric sparsity pattern."""

    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    n_nodes: int

    @property
    def nnz(self):
        return self.indices.shape[0]

    def dot(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] != self.n_nodes:
            raise DimensionError(f"spmm: graph has {self.n_nodes} nodes, operand shape {x.shape}")
        return kernels.csr_spmm(self.indptr, self.indices, self.data, x)

    def to_dense(self):
        out = np.zeros((self.n_nodes, self.n_nodes))
        rows = np.repeat(np.arange(self.n_nodes), np.diff(self.indptr))
        out[rows, self.indices] = self.data
        return out

    def row_sums(self):
        rows = np.repeat(np.arange(self.n_nodes), np.diff(self.indptr))
        return np.bincount(rows, weights=self.data, minlength=self.n_nodes)


def _csr_from_coo(rows, cols, vals, n):
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    for arr in (indptr, cols, vals):
        arr.setflags(write=False)
    return SparseGraph(indptr, cols.astype(np.int64), vals.astype(np.float64), n)


def build_csr(edges):
    """Binary symmetric adjacency of an :class:`EdgeList`."""
    u, v = edges.pairs[:, 0], edges.pairs[:, 1]
    rows = np.concatenate([u, v])
    cols = np.concatenate([v, u])
    return _csr_from_coo(rows, cols, np.ones(rows.shape[0]), edges.n_nodes)


def normalize_adjacency(g):
    """Return ``D^-1/2 (A + I) D^-1/2`` with D the degree matrix of ``A + I``."""
    n = g.n_nodes
    base_rows = np.repeat(np.arange(n), np.diff(g.indptr))
    keep = base_rows != g.indices
    rows = np.concatenate([base_rows[keep], np.arange(n)])
    cols = np.concatenate([g.indices[keep], np.arange(n)])
    vals = np.concatenate([g.data[keep], np.ones(n)])
    deg = np.bincount(rows, weights=vals, minlength=n)
    inv_sqrt = 1.0 / np.sqrt(deg)
    return _csr_from_coo(rows, cols, vals * inv_sqrt[rows] * inv_sqrt[cols], n)


def spmm(g, x):
    """Sparse-dense product ``g @ x``; gradients flow into ``x`` only.

    The backward pass multiplies by ``g`` again, which is exact because every
    graph built here is symmetric.
    """
    x = tensor(x)

    def backward(grad):
        x._accumulate(g.dot(grad))

    return Tensor._wrap(g.dot(x.data), "spmm", (x,), backward)


def laplacian_apply(g, x):
    """``(I - g) x`` for a normalized adjacency ``g``."""
    x = tensor(x)
    return x - spmm(g, x)


def smoothness(x, edges):
    """Per-column smoothness: minus the mean squared difference across edges.

    Each undirected edge counts once.
    """
    x = x.data if isinstance(x, Tensor) else np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != edges.n_nodes:
        raise DimensionError(f"smoothness: {edges.n_nodes} nodes but features shaped {x.shape}")
    if edges.n_edges == 0:
        raise ValidationError("smoothness is undefined on a graph without edges")
    return kernels.edge_smoothness(edges.pairs[:, 0], edges.pairs[:, 1], x)
