"""Dense 2-D tensors with reverse-mode gradients and an Adam optimizer.

Only the handful of ops the detector needs are supported. Every tensor is a
2-D float64 array; vectors are stored as ``(n, 1)`` or ``(1, n)``.

A graph of ops is recorded while any input requires a gradient. Calling
:meth:`Tensor.backward` on a scalar walks the graph once, accumulates into the
leaves' ``grad`` and then drops the recorded graph, so intermediate
activations live for exactly one forward/backward cycle.
"""
from contextlib import contextmanager

import numpy as np

from .errors import DimensionError, NonFiniteError

_grad_enabled = True


@contextmanager
def no_grad():
    """Disable graph recording inside the block."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


def _as_array(data):
    arr = np.array(data, dtype=np.float64, copy=True)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1)
    elif arr.ndim != 2:
        raise DimensionError(f"tensors are 2-D, got {arr.ndim}-D input")
    return np.ascontiguousarray(arr)


def _check_finite(arr, op):
    if not np.isfinite(arr).all():
        raise NonFiniteError(f"{op} produced non-finite values")
    return arr


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "_op")

    def __init__(self, data, requires_grad=False):
        self.data = _check_finite(_as_array(data), "Tensor")
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self._parents = ()
        self._backward = None
        self._op = "leaf"

    @classmethod
    def _wrap(cls, arr, op, parents, backward):
        # internal constructor: skips the copy done by __init__
        out = cls.__new__(cls)
        out.data = _check_finite(arr, op)
        out.grad = None
        out._op = op
        needs = _grad_enabled and any(p.requires_grad for p in parents)
        out.requires_grad = needs
        if needs:
            out._parents = parents
            out._backward = backward
        else:
            out._parents = ()
            out._backward = None
        return out

    @property
    def shape(self):
        return self.data.shape

    @property
    def rows(self):
        return self.data.shape[0]

    @property
    def cols(self):
        return self.data.shape[1]

    def numpy(self):
        return self.data

    def item(self):
        if self.data.size != 1:
            raise DimensionError(f"item() needs a 1x1 tensor, got {self.shape}")
        return float(self.data[0, 0])

    def __repr__(self):
        return f"Tensor(shape={self.shape}, op={self._op!r}, requires_grad={self.requires_grad})"

    def _accumulate(self, g):
        if self.grad is None:
            self.grad = g.copy()
        else:
            self.grad += g

    def backward(self, grad=None):
        """Back-propagate from this tensor and release the recorded graph."""
        if grad is None:
            if self.data.size != 1:
                raise DimensionError("backward() without a seed needs a scalar output")
            grad = np.ones_like(self.data)
        else:
            grad = _as_array(grad)
            if grad.shape != self.shape:
                raise DimensionError(f"seed gradient shape {grad.shape} != {self.shape}")

        order = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in seen:
                    stack.append((parent, False))

        self._accumulate(grad)
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)
        for node in order:
            if node._backward is not None:
                node._parents = ()
                node._backward = None
                node.grad = None

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __matmul__(self, other):
        return matmul(self, other)

    def __neg__(self):
        return scale(self, -1.0)

    @property
    def T(self):
        return transpose(self)


class Parameter(Tensor):
    """A trainable leaf. ``grad`` is always allocated and shaped like ``data``."""

    __slots__ = ("name",)

    def __init__(self, data, name):
        super().__init__(data, requires_grad=True)
        self.name = name
        self.grad = np.zeros_like(self.data)
        self._op = "param"

    def zero_grad(self):
        self.grad = np.zeros_like(self.data)

    def __repr__(self):
        return f"Parameter({self.name!r}, shape={self.shape})"


def tensor(data, requires_grad=False):
    return data if isinstance(data, Tensor) else Tensor(data, requires_grad)


def _unbroadcast(g, shape):
    if g.shape == shape:
        return g
    if shape[0] == 1 and g.shape[0] != 1:
        g = g.sum(axis=0, keepdims=True)
    if shape[1] == 1 and g.shape[1] != 1:
        g = g.sum(axis=1, keepdims=True)
    return g


def _broadcast_ok(a, b):
    for x, y in zip(a.shape, b.shape):
        if x != y and x != 1 and y != 1:
            return False
    return True


# ---------------------------------------------------------------------------
# elementwise
# ---------------------------------------------------------------------------


def add(a, b):
    a, b = tensor(a), tensor(b)
    if not _broadcast_ok(a, b):
        raise DimensionError(f"add: incompatible shapes {a.shape} and {b.shape}")

    def backward(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g, b.shape))

    return Tensor._wrap(a.data + b.data, "add", (a, b), backward)


def sub(a, b):
    a, b = tensor(a), tensor(b)
    if not _broadcast_ok(a, b):
        raise DimensionError(f"sub: incompatible shapes {a.shape} and {b.shape}")

    def backward(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(-g, b.shape))

    return Tensor._wrap(a.data - b.data, "sub", (a, b), backward)


def mul(a, b):
    a, b = tensor(a), tensor(b)
    if not _broadcast_ok(a, b):
        raise DimensionError(f"mul: incompatible shapes {a.shape} and {b.shape}")

    def backward(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g * b.data, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g * a.data, b.shape))

    return Tensor._wrap(a.data * b.data, "mul", (a, b), backward)


def scale(a, c):
    c = float(c)

    def backward(g):
        a._accumulate(g * c)

    return Tensor._wrap(a.data * c, "scale", (a,), backward)


def add_scalar(a, c):
    def backward(g):
        a._accumulate(g)

    return Tensor._wrap(a.data + float(c), "add_scalar", (a,), backward)


def relu(a):
    mask = a.data > 0.0

    def backward(g):
        a._accumulate(g * mask)

    return Tensor._wrap(np.where(mask, a.data, 0.0), "relu", (a,), backward)


def dropout(a, p, rng=None, train=True):
    """Inverted dropout; identity when ``train`` is false or ``p == 0``.

    ``rng`` may be a :class:`numpy.random.Generator` or an integer seed.
    """
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout probability must be in [0, 1), got {p}")
    if not train or p == 0.0:
        return a
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    keep = (rng.random(a.shape) >= p) / (1.0 - p)

    def backward(g):
        a._accumulate(g * keep)

    return Tensor._wrap(a.data * keep, "dropout", (a,), backward)


def concat_cols(parts):
    parts = [tensor(p) for p in parts]
    if not parts:
        raise DimensionError("concat_cols needs at least one tensor")
    n = parts[0].rows
    for p in parts:
        if p.rows != n:
            raise DimensionError(f"concat_cols: row counts differ ({p.rows} vs {n})")
    bounds = np.cumsum([0] + [p.cols for p in parts])

    def backward(g):
        for p, lo, hi in zip(parts, bounds[:-1], bounds[1:]):
            if p.requires_grad:
                p._accumulate(g[:, lo:hi])

    data = np.concatenate([p.data for p in parts], axis=1)
    return Tensor._wrap(data, "concat_cols", tuple(parts), backward)


def take_rows(a, idx):
    idx = np.asarray(idx, dtype=np.int64)

    def backward(g):
        full = np.zeros_like(a.data)
        np.add.at(full, idx, g)
        a._accumulate(full)

    return Tensor._wrap(a.data[idx], "take_rows", (a,), backward)


def transpose(a):
    def backward(g):
        a._accumulate(g.T)

    return Tensor._wrap(np.ascontiguousarray(a.data.T), "transpose", (a,), backward)


# ---------------------------------------------------------------------------
# linear algebra and reductions
# ---------------------------------------------------------------------------


def matmul(a, b):
    a, b = tensor(a), tensor(b)
    if a.cols != b.rows:
        raise DimensionError(f"matmul: {a.shape} @ {b.shape}")

    def backward(g):
        if a.requires_grad:
            a._accumulate(g @ b.data.T)
        if b.requires_grad:
            b._accumulate(a.data.T @ g)

    return Tensor._wrap(a.data @ b.data, "matmul", (a, b), backward)


def row_softmax(x, scale=1.0):
    """Row-wise softmax of ``x / scale`` with max subtraction."""
    if not scale > 0:
        raise ValueError(f"softmax scale must be positive, got {scale}")
    z = (x.data - x.data.max(axis=1, keepdims=True)) / scale
    e = np.exp(z)
    y = e / e.sum(axis=1, keepdims=True)

    def backward(g):
        inner = (g * y).sum(axis=1, keepdims=True)
        x._accumulate(y * (g - inner) / scale)

    return Tensor._wrap(y, "row_softmax", (x,), backward)


def cosine_rows(a, b, eps=1e-12):
    """Per-row cosine similarity, returned as an ``(n, 1)`` tensor.

    Row norms below ``eps`` are clamped to ``eps``, so a zero row has cosine
    0. Cosine is discontinuous there; such a row gets zero gradient instead
    of the ~1/eps spike the clamped formula would give.
    """
    a, b = tensor(a), tensor(b)
    if a.shape != b.shape:
        raise DimensionError(f"cosine_rows: {a.shape} vs {b.shape}")
    na_raw = np.linalg.norm(a.data, axis=1, keepdims=True)
    nb_raw = np.linalg.norm(b.data, axis=1, keepdims=True)
    na = np.maximum(na_raw, eps)
    nb = np.maximum(nb_raw, eps)
    dot = (a.data * b.data).sum(axis=1, keepdims=True)
    cos = dot / (na * nb)

    def backward(g):
        if a.requires_grad:
            ga = b.data / (na * nb) - cos / (na * na) * a.data
            a._accumulate(np.where(na_raw >= eps, g * ga, 0.0))
        if b.requires_grad:
            gb = a.data / (na * nb) - cos / (nb * nb) * b.data
            b._accumulate(np.where(nb_raw >= eps, g * gb, 0.0))

    return Tensor._wrap(cos, "cosine_rows", (a, b), backward)


def sum_all(a):
    def backward(g):
        a._accumulate(np.full_like(a.data, g[0, 0]))

    return Tensor._wrap(np.array([[a.data.sum()]]), "sum", (a,), backward)


def mean_all(a):
    n = a.data.size

    def backward(g):
        a._accumulate(np.full_like(a.data, g[0, 0] / n))

    return Tensor._wrap(np.array([[a.data.mean()]]), "mean", (a,), backward)


# ---------------------------------------------------------------------------
# optimizer
# ---------------------------------------------------------------------------


class Adam:
    """Adam with decoupled weight decay (the AdamW update rule).

    Gradients are cleared after every :meth:`step`.
    """

    def __init__(self, params, lr=1e-3, weight_decay=1e-5, betas=(0.9, 0.999), eps=1e-8):
        self.params = list(params)
        self.lr = float(lr)
        self.weight_decay = float(weight_decay)
        self.beta1, self.beta2 = (float(b) for b in betas)
        self.eps = float(eps)
        self.step_count = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()

    def step(self):
        self.step_count += 1
        t = self.step_count
        bc1 = 1.0 - self.beta1**t
        bc2 = 1.0 - self.beta2**t
        for p, m, v in zip(self.params, self.m, self.v):
            g = p.grad
            if self.weight_decay:
                p.data *= 1.0 - self.lr * self.weight_decay
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p.data -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
            _check_finite(p.data, "adam_step")
        self.zero_grad()
