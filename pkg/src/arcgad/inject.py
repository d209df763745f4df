"""Synthetic anomaly injection: planted cliques and far-feature copies."""
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

DEFAULT_CLIQUE_SIZE = 15
DEFAULT_POOL_SIZE = 50


@dataclass(frozen=True)
class InjectionSpec:
    p: int = DEFAULT_CLIQUE_SIZE
    q: int = 5
    k: int = DEFAULT_POOL_SIZE
    attr_count: int = None
    seed: int = 0

    @property
    def n_attribute(self):
        return self.p * self.q if self.attr_count is None else self.attr_count

    def validate(self, n_nodes):
        if self.p < 2:
            raise ValidationError(f"clique size p must be >= 2, got {self.p}")
        if self.q < 0 or self.k < 1 or self.n_attribute < 0:
            raise ValidationError("need q >= 0, k >= 1, attr_count >= 0")
        total = self.p * self.q + self.n_attribute
        if total >= n_nodes:
            raise ValidationError(f"{total} anomalies requested for only {n_nodes} nodes")
        return self


def _labels(ds):
    return np.zeros(ds.n_nodes, dtype=np.int64) if ds.labels is None else ds.labels.copy()


def inject_structural(ds, p, q, seed):
    """Plant ``q`` disjoint cliques of ``p`` previously normal nodes."""
    if p < 2 or q < 0:
        raise ValidationError(f"need p >= 2 and q >= 0, got p={p}, q={q}")
    labels = _labels(ds)
    free = np.flatnonzero(labels == 0)
    if p * q > free.size:
        raise ValidationError(f"{p * q} clique nodes requested, only {free.size} normal nodes")
    if q == 0:
        return ds.with_(labels=labels)
    rng = np.random.default_rng(seed)
    members = rng.choice(free, size=p * q, replace=False).reshape(q, p)
    iu, ju = np.triu_indices(p, k=1)
    new_edges = np.concatenate([np.stack([c[iu], c[ju]], axis=1) for c in members])
    labels[members.ravel()] = 1
    return ds.with_(edges=ds.edges.union(new_edges), labels=labels)


def inject_attribute(ds, count, k, seed):
    """Overwrite ``count`` normal nodes' features with a far-away node's features.

    For each target, ``k`` candidates are drawn from nodes that are neither the
    target nor already anomalous, and the one at the largest Euclidean
    distance is copied. Candidates also exclude every other target, so a copied
    row is never overwritten later and each target keeps an exact twin.
    """
    if count < 0 or k < 1:
        raise ValidationError(f"need count >= 0 and k >= 1, got count={count}, k={k}")
    labels = _labels(ds)
    x = ds.features.copy()
    free = np.flatnonzero(labels == 0)
    if count > free.size:
        raise ValidationError(f"{count} attribute targets requested, only {free.size} normal nodes")
    rng = np.random.default_rng(seed)
    targets = rng.choice(free, size=count, replace=False)
    pool = np.setdiff1d(free, targets)
    for t in targets:
        if pool.size < k:
            raise ValidationError(f"candidate pool of {pool.size} nodes is smaller than k={k}")
        cand = rng.choice(pool, size=k, replace=False)
        dist = np.linalg.norm(ds.features[cand] - ds.features[t], axis=1)
        x[t] = ds.features[cand[np.argmax(dist)]]
        labels[t] = 1
    return ds.with_(features=x, labels=labels)


def inject_combined(ds, spec):
    """Structural then attribute injection on disjoint node sets."""
    spec.validate(ds.n_nodes)
    s_struct, s_attr = np.random.SeedSequence(spec.seed).spawn(2)
    out = inject_structural(ds, spec.p, spec.q, np.random.default_rng(s_struct))
    return inject_attribute(out, spec.n_attribute, spec.k, np.random.default_rng(s_attr))
