"""Stochastic block model graphs whose features are smoothed over the graph."""
import numpy as np

from .data import Dataset
from .graph import EdgeList, build_csr, normalize_adjacency


def sbm_edges(blocks, p_in, p_out, rng):
    """Sample an undirected SBM edge list given each node's block id."""
    blocks = np.asarray(blocks)
    n_blocks = int(blocks.max()) + 1 if blocks.size else 0
    members = [np.flatnonzero(blocks == b) for b in range(n_blocks)]
    chunks = []
    for a in range(n_blocks):
        for b in range(a, n_blocks):
            ia, ib = members[a], members[b]
            hit = rng.random((ia.size, ib.size)) < (p_in if a == b else p_out)
            r, c = np.nonzero(np.triu(hit, k=1) if a == b else hit)
            chunks.append(np.stack([ia[r], ib[c]], axis=1))
    pairs = np.concatenate(chunks) if chunks else np.zeros((0, 2), dtype=np.int64)
    return EdgeList.from_pairs(pairs, blocks.size)


def sbm_dataset(
    n=1000,
    d=200,
    n_blocks=5,
    avg_degree=8.0,
    homophily=0.9,
    latent_dim=96,
    hops=2,
    noise=0.2,
    seed=0,
    name=None,
):
    """A homophilous SBM with graph-smooth node features.

    ``avg_degree`` and ``homophily`` (expected fraction of a node's edges that
    stay inside its block) set the block probabilities. Features mix a block
    signature with ``latent_dim`` random signals smoothed by ``hops`` rounds of
    normalized propagation (decaying variance, so the spectrum is not flat),
    plus i.i.d. noise of scale ``noise``.
    """
    rng = np.random.default_rng(seed)
    blocks = rng.permutation(np.arange(n) % n_blocks)
    size = n / n_blocks
    p_in = min(1.0, avg_degree * homophily / max(size - 1, 1))
    p_out = min(1.0, avg_degree * (1 - homophily) / max(n - size, 1))
    edges = sbm_edges(blocks, p_in, p_out, rng)

    g_norm = normalize_adjacency(build_csr(edges))
    z = rng.normal(0.0, 1.0, (n, latent_dim)) / np.sqrt(1.0 + np.arange(latent_dim))
    for _ in range(hops):
        z = g_norm.dot(z)
    z /= np.maximum(z.std(axis=0), 1e-12)
    signature = 2.0 * rng.normal(0.0, 1.0, (n_blocks, n_blocks))[blocks]
    latent = np.hstack([signature, z])
    mixing = rng.normal(0.0, 1.0, (latent.shape[1], d)) / np.sqrt(latent.shape[1])
    x = latent @ mixing + noise * rng.normal(0.0, 1.0, (n, d))
    return Dataset(name or f"sbm-n{n}-d{d}-s{seed}", x, edges, np.zeros(n, dtype=np.int64))


def planted_frequency_dataset(
    n=600,
    n_rough=10,
    n_smooth=40,
    anomaly_rate=0.05,
    shift=1.5,
    hops=4,
    seed=0,
    name=None,
):
    """Labeled SBM whose anomalies differ only in high-frequency features.

    The first ``n_rough`` columns are i.i.d. per-node noise (rough over the
    graph); anomalies get a random +/-``shift`` pattern there. The remaining
    ``n_smooth`` columns are graph-smoothed signals that carry no label
    information. Column order is shuffled so nothing depends on position.
    """
    rng = np.random.default_rng(seed)
    base = sbm_dataset(n=n, d=1, seed=int(rng.integers(2**31)), name="base")
    edges = base.edges
    g_norm = normalize_adjacency(build_csr(edges))
    labels = np.zeros(n, dtype=np.int64)
    labels[rng.choice(n, size=max(1, int(round(anomaly_rate * n))), replace=False)] = 1

    rough = rng.normal(0.0, 1.0, (n, n_rough))
    pattern = rng.choice([-shift, shift], size=(int(labels.sum()), n_rough))
    rough[labels == 1] += pattern
    smooth = rng.normal(0.0, 1.0, (n, n_smooth))
    for _ in range(hops):
        smooth = g_norm.dot(smooth)
    x = np.hstack([rough, smooth])[:, rng.permutation(n_rough + n_smooth)]
    return Dataset(name or f"planted-n{n}-s{seed}", x, edges, labels)
