"""Cross-attentive reconstruction of query embeddings from context embeddings."""
from dataclasses import dataclass

import numpy as np

from . import autograd as ag
from .autograd import Parameter, Tensor, tensor
from .errors import DimensionError, ValidationError


class ScorerParams:
    def __init__(self, w_q, w_k):
        self.w_q = w_q
        self.w_k = w_k

    @classmethod
    def init(cls, d_e, rng, sigma=0.01):
        return cls(
            Parameter(rng.normal(0.0, sigma, (d_e, d_e)), "scorer.W_q"),
            Parameter(rng.normal(0.0, sigma, (d_e, d_e)), "scorer.W_k"),
        )

    @classmethod
    def zeros(cls, d_e):
        return cls(
            Parameter(np.zeros((d_e, d_e)), "scorer.W_q"),
            Parameter(np.zeros((d_e, d_e)), "scorer.W_k"),
        )

    @property
    def d_e(self):
        return self.w_q.rows

    def parameters(self):
        return [self.w_q, self.w_k]


@dataclass(frozen=True)
class ContextSplit:
    context: np.ndarray
    query: np.ndarray

    @classmethod
    def make(cls, context, query, n_nodes, labels=None):
        context = np.asarray(context, dtype=np.int64)
        query = np.asarray(query, dtype=np.int64)
        if context.size == 0:
            raise ValidationError("no context nodes")
        for name, ids in (("context", context), ("query", query)):
            if ids.size and (ids.min() < 0 or ids.max() >= n_nodes):
                raise ValidationError(f"{name} id out of range for {n_nodes} nodes")
        if np.unique(context).size != context.size:
            raise ValidationError("duplicate context ids")
        if np.intersect1d(context, query).size:
            raise ValidationError("context and query sets overlap")
        if labels is not None and np.asarray(labels)[context].any():
            raise ValidationError("context nodes must be labeled normal")
        return cls(context, query)


def _check_pair(h_q, h_k, params):
    if h_k.rows == 0:
        raise ValidationError("no context nodes")
    if h_q.cols != h_k.cols or h_q.cols != params.d_e:
        raise DimensionError(
            f"embedding widths differ: query {h_q.cols}, context {h_k.cols}, params {params.d_e}"
        )


def attention(h_q, h_k, params):
    h_q, h_k = tensor(h_q), tensor(h_k)
    _check_pair(h_q, h_k, params)
    q = ag.matmul(h_q, params.w_q)
    k = ag.matmul(h_k, params.w_k)
    return ag.row_softmax(ag.matmul(q, ag.transpose(k)), np.sqrt(params.d_e))


def cross_attend(h_q, h_k, params):
    """Reconstruct each query row as an attention-weighted mix of context rows.

    There is no value projection: the output lives in the context embedding
    space, so it can be compared to ``h_q`` directly.
    """
    h_k = tensor(h_k)
    return ag.matmul(attention(h_q, h_k, params), h_k)


def export_attention(h_q, h_k, params):
    with ag.no_grad():
        return attention(h_q, h_k, params).data.copy()


def drift_scores(h_q, h_tilde):
    """L2 distance between each query embedding and its reconstruction."""
    a = h_q.data if isinstance(h_q, Tensor) else np.asarray(h_q, dtype=np.float64)
    b = h_tilde.data if isinstance(h_tilde, Tensor) else np.asarray(h_tilde, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"drift_scores: {a.shape} vs {b.shape}")
    return np.sqrt(((a - b) ** 2).sum(axis=1))


def marginal_cosine_loss(h_q, h_tilde, y, eps=0.0):
    """Mean over queries of ``1 - cos`` (normal) or ``max(0, cos - eps)`` (anomalous)."""
    if not -1.0 <= eps <= 1.0:
        raise ValidationError(f"margin must be in [-1, 1], got {eps}")
    y = np.asarray(y).reshape(-1, 1)
    if not np.isin(y, (0, 1)).all():
        raise ValidationError("labels must be 0/1")
    cos = ag.cosine_rows(h_q, h_tilde)
    if y.shape[0] != cos.rows:
        raise DimensionError(f"{y.shape[0]} labels for {cos.rows} queries")
    abnormal = y.astype(np.float64)
    normal_term = ag.mul(ag.add_scalar(ag.scale(cos, -1.0), 1.0), 1.0 - abnormal)
    abnormal_term = ag.mul(ag.relu(ag.add_scalar(cos, -eps)), abnormal)
    return ag.mean_all(ag.add(normal_term, abnormal_term))
