"""Multi-hop ego-neighbor residual encoder.

Propagation ``X[l] = A_norm @ X[l-1]`` is parameter-free, so the ``L + 1``
stages are computed once per dataset. A single MLP is applied to every stage
and the embedding is the column concatenation of ``Z[l] - Z[0]`` for
``l = 1..L``.
"""
from dataclasses import dataclass

import numpy as np

from . import autograd as ag
from .autograd import Parameter, Tensor
from .errors import DimensionError, ValidationError
from .graph import laplacian_apply

ENCODER_MODES = ("residual", "raw")


@dataclass
class EncoderConfig:
    d_u: int = 64
    L: int = 3
    hidden: int = 256
    mlp_layers: int = 2
    dropout: float = 0.2
    bias: bool = True
    mode: str = "residual"

    def validate(self, strict_grid=True):
        if self.L < 1:
            raise ValidationError(f"L must be >= 1, got {self.L}")
        if strict_grid and self.L > 5:
            raise ValidationError(f"L={self.L} is outside the supported grid 1..5")
        if self.hidden < 1 or self.mlp_layers < 1 or self.d_u < 1:
            raise ValidationError("hidden, mlp_layers and d_u must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValidationError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.mode not in ENCODER_MODES:
            raise ValidationError(f"unknown encoder mode {self.mode!r}")
        return self

    @property
    def embed_dim(self):
        return self.L * self.hidden


class EncoderParams:
    """Weights of the MLP shared by all propagation stages."""

    def __init__(self, layers):
        # layers: list of (weight, bias-or-None)
        self.layers = list(layers)

    @classmethod
    def init(cls, cfg, rng):
        layers = []
        fan_in = cfg.d_u
        for i in range(cfg.mlp_layers):
            bound = 1.0 / np.sqrt(fan_in)
            w = Parameter(rng.uniform(-bound, bound, (fan_in, cfg.hidden)), f"encoder.{i}.weight")
            b = None
            if cfg.bias:
                b = Parameter(rng.uniform(-bound, bound, (1, cfg.hidden)), f"encoder.{i}.bias")
            layers.append((w, b))
            fan_in = cfg.hidden
        return cls(layers)

    @classmethod
    def linear(cls, w):
        """Single bias-free linear layer; the configuration used by the Laplacian check."""
        return cls([(Parameter(w, "encoder.0.weight"), None)])

    def parameters(self):
        out = []
        for w, b in self.layers:
            out.append(w)
            if b is not None:
                out.append(b)
        return out


def propagate(g_norm, x0, L):
    """Return ``[X0, A X0, ..., A^L X0]`` as constant tensors."""
    if L < 1:
        raise ValidationError(f"L must be >= 1, got {L}")
    x = x0.data if isinstance(x0, Tensor) else np.asarray(x0, dtype=np.float64)
    if x.shape[0] != g_norm.n_nodes:
        raise DimensionError(f"propagate: {g_norm.n_nodes} nodes, features shaped {x.shape}")
    stages = [x]
    for _ in range(L):
        stages.append(g_norm.dot(stages[-1]))
    return [Tensor(s) for s in stages]


def mlp(x, params, train=False, p=0.0, rng=None):
    last = len(params.layers) - 1
    for i, (w, b) in enumerate(params.layers):
        x = ag.matmul(x, w)
        if b is not None:
            x = ag.add(x, b)
        if i < last:
            x = ag.relu(x)
            x = ag.dropout(x, p, rng, train)
    return x


def encode(stages, params, train=False, p=0.0, rng=None, rows=None, mode="residual", L=None):
    """Embed nodes from precomputed propagation stages.

    ``rows`` restricts the computation to a subset of nodes (the MLP is
    row-wise, so this is exact). ``mode="raw"`` skips the ego subtraction and
    concatenates ``Z[1..L]`` instead; it exists for ablations.
    """
    if L is not None and len(stages) != L + 1:
        raise DimensionError(f"expected {L + 1} stages, got {len(stages)}")
    if len(stages) < 2:
        raise DimensionError("encode needs at least two stages")
    shape = stages[0].shape
    for s in stages:
        if s.shape != shape:
            raise DimensionError("all propagation stages must share a shape")
    if mode not in ENCODER_MODES:
        raise ValidationError(f"unknown encoder mode {mode!r}")

    arrays = [s.data if isinstance(s, Tensor) else np.asarray(s, dtype=np.float64) for s in stages]
    if rows is not None:
        rows = np.asarray(rows, dtype=np.int64)
        arrays = [a[rows] for a in arrays]
    m = arrays[0].shape[0]
    z_all = mlp(Tensor(np.vstack(arrays)), params, train, p, rng)
    zs = [ag.take_rows(z_all, np.arange(l * m, (l + 1) * m)) for l in range(len(arrays))]
    if mode == "raw":
        return ag.concat_cols(zs[1:])
    return ag.concat_cols([ag.sub(z, zs[0]) for z in zs[1:]])


def laplacian_identity_check(g_norm, x, w):
    """Max deviation between the first residual and ``-(I - A_norm) X W``.

    Uses a single bias-free linear layer with weight ``w``.
    """
    w = np.asarray(w, dtype=np.float64)
    with ag.no_grad():
        stages = propagate(g_norm, x, 1)
        r1 = encode(stages, EncoderParams.linear(w)).data
        expected = -(laplacian_apply(g_norm, stages[0]).data @ w)
    return float(np.abs(r1 - expected).max()) if r1.size else 0.0
