import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arcgad.data import Dataset
from arcgad.errors import ValidationError
from arcgad.graph import EdgeList
from arcgad.inject import InjectionSpec, inject_attribute, inject_combined, inject_structural


def empty_dataset(n, d=3, seed=0):
    x = np.random.default_rng(seed).normal(size=(n, d))
    return Dataset("t", x, EdgeList.from_pairs([], n))


def ring_dataset(n, d=4, seed=0):
    x = np.random.default_rng(seed).normal(size=(n, d))
    return Dataset("t", x, EdgeList.from_pairs([(i, (i + 1) % n) for i in range(n)], n))


def test_single_pair_clique_on_empty_graph():
    out = inject_structural(empty_dataset(4), 2, 1, seed=0)
    assert out.edges.n_edges == 1
    u, v = out.edges.pairs[0]
    assert sorted(np.flatnonzero(out.labels).tolist()) == sorted([u, v])


def test_cliques_are_complete_and_disjoint():
    ds = ring_dataset(30)
    out = inject_structural(ds, 3, 2, seed=5)
    assert out.labels.sum() == 6
    members = np.flatnonzero(out.labels)
    edges = {tuple(e) for e in out.edges.pairs.tolist()}
    added = edges - {tuple(e) for e in ds.edges.pairs.tolist()}
    # every added edge joins two members; each member sits in exactly one triangle
    assert all(u in members and v in members for u, v in added)
    adj = {m: set() for m in members}
    for u, v in edges:
        if u in adj and v in adj:
            adj[u].add(v)
            adj[v].add(u)
    assert all(len(adj[m]) >= 2 for m in members)
    assert np.array_equal(out.features, ds.features)


def test_default_sizes():
    ds = ring_dataset(400)
    spec = InjectionSpec(p=15, q=5, k=50, seed=1)
    assert spec.n_attribute == 75
    out = inject_combined(ds, spec)
    assert out.labels.sum() == 150


def test_attribute_copy_picks_farthest():
    x = np.array([[0.0], [1.0], [2.0], [10.0], [3.0]])
    ds = Dataset("t", x, EdgeList.from_pairs([], 5))
    for seed in range(10):
        out = inject_attribute(ds, 1, k=4, seed=seed)  # k = n - 1: whole pool
        t = int(np.flatnonzero(out.labels)[0])
        others = np.setdiff1d(np.arange(5), [t])
        far = others[np.argmax(np.abs(x[others, 0] - x[t, 0]))]
        assert out.features[t, 0] == x[far, 0]


def test_attribute_copy_semantics():
    ds = ring_dataset(120, seed=2)
    out = inject_attribute(ds, 10, k=20, seed=3)
    targets = np.flatnonzero(out.labels)
    assert targets.size == 10
    untouched = np.setdiff1d(np.arange(120), targets)
    assert np.array_equal(out.features[untouched], ds.features[untouched])
    for t in targets:
        twins = np.flatnonzero((ds.features == out.features[t]).all(axis=1))
        assert twins.size and t not in twins
    assert np.array_equal(out.edges.pairs, ds.edges.pairs)


def test_zero_cliques_and_zero_attributes_are_identity():
    ds = ring_dataset(50)
    out = inject_combined(ds, InjectionSpec(p=5, q=0, k=5, attr_count=0))
    assert np.array_equal(out.features, ds.features)
    assert np.array_equal(out.edges.pairs, ds.edges.pairs)
    assert out.labels.sum() == 0


def test_determinism():
    ds = ring_dataset(200)
    spec = InjectionSpec(p=5, q=3, k=10, seed=42)
    a, b = inject_combined(ds, spec), inject_combined(ds, spec)
    assert np.array_equal(a.labels, b.labels)
    assert np.array_equal(a.features, b.features)
    assert np.array_equal(a.edges.pairs, b.edges.pairs)
    c = inject_combined(ds, InjectionSpec(p=5, q=3, k=10, seed=43))
    assert not np.array_equal(a.labels, c.labels)


def test_validation():
    ds = ring_dataset(20)
    with pytest.raises(ValidationError):
        InjectionSpec(p=5, q=2, k=5).validate(20)
    with pytest.raises(ValidationError):
        inject_structural(ds, 1, 1, seed=0)
    with pytest.raises(ValidationError, match="pool"):
        inject_attribute(ds, 2, k=19, seed=0)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 6), st.integers(0, 4), st.integers(0, 10), st.integers(0, 2**31 - 1))
def test_combined_counts(p, q, attr, seed):
    n = 80
    ds = ring_dataset(n, seed=seed % 7)
    out = inject_combined(ds, InjectionSpec(p=p, q=q, k=5, attr_count=attr, seed=seed))
    assert out.labels.sum() == p * q + attr
    # structural injection only adds edges
    old = {tuple(e) for e in ds.edges.pairs.tolist()}
    assert old <= {tuple(e) for e in out.edges.pairs.tolist()}
