"""Joint multi-dataset training and few-shot in-context inference."""
import logging
from dataclasses import dataclass

import numpy as np

from . import autograd as ag
from .align import align_dataset, standardize_columns
from .autograd import Adam
from .checkpoint import Checkpoint
from .config import TrainConfig
from .encoder import EncoderParams, encode, propagate
from .errors import ValidationError
from .graph import build_csr, normalize_adjacency, smoothness
from .metrics import auprc, auroc
from .scorer import ContextSplit, ScorerParams, cross_attend, drift_scores, export_attention, marginal_cosine_loss

log = logging.getLogger(__name__)


class Detector:
    """The single shared parameter set: one encoder MLP and one scorer."""

    def __init__(self, cfg, encoder, scorer):
        self.cfg = cfg
        self.encoder = encoder
        self.scorer = scorer

    @classmethod
    def init(cls, cfg, rng):
        enc = EncoderParams.init(cfg.encoder_config(), rng)
        sc = ScorerParams.init(cfg.embed_dim, rng, cfg.init_sigma)
        return cls(cfg, enc, sc)

    @classmethod
    def from_checkpoint(cls, ckpt):
        cfg = ckpt.config
        layers = []
        for i in range(cfg.mlp_layers):
            w = ag.Parameter(ckpt.params[f"encoder.{i}.weight"], f"encoder.{i}.weight")
            b_name = f"encoder.{i}.bias"
            b = ag.Parameter(ckpt.params[b_name], b_name) if b_name in ckpt.params else None
            layers.append((w, b))
        sc = ScorerParams(
            ag.Parameter(ckpt.params["scorer.W_q"], "scorer.W_q"),
            ag.Parameter(ckpt.params["scorer.W_k"], "scorer.W_k"),
        )
        return cls(cfg, EncoderParams(layers), sc)

    def parameters(self):
        return self.encoder.parameters() + self.scorer.parameters()

    def state(self):
        return {p.name: p.data.copy() for p in self.parameters()}

    def embed(self, prepared, rows, train=False, rng=None):
        return encode(
            prepared.stages,
            self.encoder,
            train=train,
            p=self.cfg.dropout,
            rng=rng,
            rows=rows,
            mode=self.cfg.encoder_mode,
            L=self.cfg.L,
        )


@dataclass
class PreparedGraph:
    """A dataset after alignment, with its propagation stages cached."""

    dataset: object
    alignment: object
    stages: list

    @property
    def n_nodes(self):
        return self.dataset.n_nodes


def prepare(ds, cfg):
    aligned = align_dataset(ds.features, ds.edges, cfg.d_u, cfg.seed)
    g_norm = normalize_adjacency(build_csr(ds.edges))
    return PreparedGraph(ds, aligned, propagate(g_norm, aligned.features, cfg.L))


def _sample_episode(labels, n_k, rng):
    normals = np.flatnonzero(labels == 0)
    anomalies = np.flatnonzero(labels == 1)
    if normals.size < n_k + 1:
        raise ValidationError(f"need more than n_k={n_k} normal nodes, have {normals.size}")
    context = rng.choice(normals, size=n_k, replace=False)
    rest = np.setdiff1d(normals, context)
    picked = rng.choice(rest, size=min(anomalies.size, rest.size), replace=False)
    query = np.concatenate([anomalies, picked])
    y = np.concatenate([np.ones(anomalies.size, dtype=np.int64), np.zeros(picked.size, dtype=np.int64)])
    return context, query, y


def episode_loss(model, prepared, context, query, y, train=True, rng=None):
    rows = np.concatenate([context, query])
    h = model.embed(prepared, rows, train=train, rng=rng)
    n_k = context.size
    h_k = ag.take_rows(h, np.arange(n_k))
    h_q = ag.take_rows(h, np.arange(n_k, rows.size))
    h_tilde = cross_attend(h_q, h_k, model.scorer)
    return marginal_cosine_loss(h_q, h_tilde, y, model.cfg.eps)


def train_generalist(datasets, cfg=None, prepared=None, callback=None):
    """Train one detector on several labeled datasets.

    Every epoch visits each dataset once: fresh normal context nodes, a query
    batch of all anomalies plus as many other normals, and one optimizer step.
    """
    cfg = (cfg or TrainConfig()).validate()
    if not datasets:
        raise ValidationError("need at least one training dataset")
    for ds in datasets:
        if not ds.has_labels:
            raise ValidationError(f"{ds.name}: training datasets must be labeled")
        if ds.labels.sum() == 0:
            raise ValidationError(f"{ds.name}: training dataset has no anomalies")
        ds.check_anomaly_fraction()
        if (ds.labels == 0).sum() <= cfg.n_k:
            raise ValidationError(f"{ds.name}: fewer normal nodes than n_k={cfg.n_k}")

    rng = np.random.default_rng(cfg.seed)
    model = Detector.init(cfg, rng)
    if prepared is None:
        prepared = [prepare(ds, cfg) for ds in datasets]
    opt = Adam(model.parameters(), lr=cfg.lr, weight_decay=cfg.weight_decay)

    history = []
    for epoch in range(cfg.epochs):
        losses = []
        for pg in prepared:
            context, query, y = _sample_episode(pg.dataset.labels, cfg.n_k, rng)
            loss = episode_loss(model, pg, context, query, y, train=True, rng=rng)
            loss.backward()
            opt.step()
            losses.append(loss.item())
        history.append(float(np.mean(losses)))
        if callback is not None:
            callback(epoch, history[-1])
        if epoch % 20 == 0 or epoch == cfg.epochs - 1:
            log.info("epoch %d loss %.6f", epoch, history[-1])

    summary = {
        "datasets": [ds.name for ds in datasets],
        "epochs": cfg.epochs,
        "steps": opt.step_count,
        "loss_history": history,
    }
    return Checkpoint(cfg, model.state(), summary)


@dataclass
class InferenceResult:
    query_ids: np.ndarray
    scores: np.ndarray
    context_ids: np.ndarray
    attention: np.ndarray = None


def infer(ds, ckpt, context_ids, prepared=None, with_attention=False):
    """Score every non-context node of ``ds`` with a trained checkpoint."""
    model = ckpt if isinstance(ckpt, Detector) else Detector.from_checkpoint(ckpt)
    context = np.asarray(context_ids, dtype=np.int64).ravel()
    query = np.setdiff1d(np.arange(ds.n_nodes), context)
    split = ContextSplit.make(context, query, ds.n_nodes, ds.labels)
    if prepared is None:
        prepared = prepare(ds, model.cfg)
    with ag.no_grad():
        h = model.embed(prepared, None, train=False).data
        h_k, h_q = h[split.context], h[split.query]
        h_tilde = cross_attend(h_q, h_k, model.scorer).data
        scores = drift_scores(h_q, h_tilde)
        attn = export_attention(h_q, h_k, model.scorer) if with_attention else None
    return InferenceResult(split.query, scores, split.context, attn)


def sample_context(labels, n_k, seed):
    normals = np.flatnonzero(np.asarray(labels) == 0)
    if normals.size <= n_k:
        raise ValidationError(f"need more than n_k={n_k} normal nodes, have {normals.size}")
    return np.sort(np.random.default_rng(seed).choice(normals, size=n_k, replace=False))


def evaluate(ds, ckpt, n_k=10, seed=0, prepared=None):
    """AUROC and AUPRC on the query nodes for one sampled context set."""
    if not ds.has_labels:
        raise ValidationError(f"{ds.name}: evaluation needs labels")
    context = sample_context(ds.labels, n_k, seed)
    res = infer(ds, ckpt, context, prepared=prepared)
    y = ds.labels[res.query_ids]
    return auroc(res.scores, y), auprc(res.scores, y)


def sweep_context_sizes(ds, ckpt, n_ks=(2, 5, 10, 25, 50, 100), seeds=5, prepared=None):
    """Mean/std of both metrics for each context size over ``seeds`` resamples."""
    model = ckpt if isinstance(ckpt, Detector) else Detector.from_checkpoint(ckpt)
    if prepared is None:
        prepared = prepare(ds, model.cfg)
    rows = []
    for n_k in n_ks:
        vals = np.array([evaluate(ds, model, n_k, s, prepared) for s in range(seeds)])
        rows.append(
            {
                "n_k": int(n_k),
                "seeds": int(seeds),
                "auroc_mean": float(vals[:, 0].mean()),
                "auroc_std": float(vals[:, 0].std()),
                "auprc_mean": float(vals[:, 1].mean()),
                "auprc_std": float(vals[:, 1].std()),
            }
        )
    return rows


def one_class_scores(x, g_norm, context, L=2):
    """Distance to the context centroid of linear multi-hop residual embeddings.

    This is the full scoring path with an identity MLP and an all-zero
    scorer, i.e. the untrained one-class limit of the detector.
    """
    d = x.shape[1]
    with ag.no_grad():
        h = encode(propagate(g_norm, x, L), EncoderParams.linear(np.eye(d))).data
        query = np.setdiff1d(np.arange(x.shape[0]), context)
        h_q, h_k = h[query], h[context]
        h_tilde = cross_attend(h_q, h_k, ScorerParams.zeros(h.shape[1])).data
    return query, drift_scores(h_q, h_tilde)


def smoothness_report(ds, groups=5, n_k=10, seeds=5, L=2):
    """Per-smoothness-group AUROC of the one-class scorer on raw features.

    Features are standardized, sorted by ascending smoothness and cut into
    ``groups`` contiguous groups; row 0 holds the least smooth features
    (percentile 0-20 for five groups).
    """
    if not ds.has_labels:
        raise ValidationError(f"{ds.name}: smoothness report needs labels")
    if ds.n_features < groups:
        raise ValidationError(f"{ds.n_features} features cannot form {groups} groups")
    if groups < 1:
        raise ValidationError("groups must be >= 1")
    x = standardize_columns(ds.features)
    s = smoothness(x, ds.edges)
    order = np.argsort(s, kind="stable")
    g_norm = normalize_adjacency(build_csr(ds.edges))
    contexts = [sample_context(ds.labels, n_k, seed) for seed in range(seeds)]
    rows = []
    for gi, cols in enumerate(np.array_split(order, groups)):
        xs = x[:, cols]
        vals = []
        for context in contexts:
            query, scores = one_class_scores(xs, g_norm, context, L)
            vals.append(auroc(scores, ds.labels[query]))
        rows.append(
            {
                "group": gi,
                "percentile": f"{100 * gi // groups}-{100 * (gi + 1) // groups}",
                "n_features": int(cols.size),
                "s_min": float(s[cols].min()),
                "s_max": float(s[cols].max()),
                "auroc": float(np.mean(vals)),
            }
        )
    return rows
