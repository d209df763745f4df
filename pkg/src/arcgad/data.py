"""Datasets and the on-disk directory format.

A dataset directory holds::

    meta.json      {"name": ..., "n_nodes": ..., "n_features": ...}
    edges.tsv      one undirected edge per line: "u<TAB>v", 0-based
    features.csv   n rows of d comma-separated numbers, no header
    labels.txt     optional, n lines of 0/1
"""
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import DataIOError, ValidationError
from .graph import EdgeList


@dataclass(frozen=True)
class Dataset:
    name: str
    features: np.ndarray
    edges: EdgeList
    labels: np.ndarray = None

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        if x.ndim != 2:
            raise ValidationError(f"{self.name}: features must be 2-D, got shape {x.shape}")
        if not np.isfinite(x).all():
            raise ValidationError(f"{self.name}: features contain non-finite values")
        if self.edges.n_nodes != x.shape[0]:
            raise ValidationError(
                f"{self.name}: edge list covers {self.edges.n_nodes} nodes, features have {x.shape[0]} rows"
            )
        object.__setattr__(self, "features", x)
        if self.labels is not None:
            y = np.asarray(self.labels).ravel()
            if y.shape[0] != x.shape[0]:
                raise ValidationError(f"{self.name}: {y.shape[0]} labels for {x.shape[0]} nodes")
            if not np.isin(y, (0, 1)).all():
                raise ValidationError(f"{self.name}: labels must be 0/1")
            object.__setattr__(self, "labels", y.astype(np.int64))

    def check_anomaly_fraction(self):
        """Reject labeled data where anomalies are not the minority.

        Kept out of the constructor so injection on tiny graphs can still
        produce intermediate datasets; loaders and training call it.
        """
        if self.labels is not None and self.labels.size and self.labels.mean() >= 0.5:
            raise ValidationError(
                f"{self.name}: anomaly fraction {self.labels.mean():.3f} must stay below 0.5"
            )
        return self

    @property
    def n_nodes(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    @property
    def has_labels(self):
        return self.labels is not None

    def with_(self, **changes):
        return replace(self, **changes)


def _read_text(path):
    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DataIOError(f"missing file: {path}") from None
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc


def _parse_edges(text, path, n):
    pairs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        try:
            if len(parts) != 2:
                raise ValueError
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValidationError(f"{path}:{lineno}: malformed edge line {line!r}") from None
        if not (0 <= u < n and 0 <= v < n):
            raise ValidationError(f"{path}:{lineno}: node index out of range for {n} nodes")
        pairs.append((u, v))
    return EdgeList.from_pairs(np.array(pairs, dtype=np.int64).reshape(-1, 2), n)


def _parse_features(text, path, n, d):
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rows.append([float(v) for v in line.split(",")])
        except ValueError:
            raise ValidationError(f"{path}:{lineno}: malformed feature row") from None
        if len(rows[-1]) != d:
            raise ValidationError(f"{path}:{lineno}: expected {d} values, got {len(rows[-1])}")
    if len(rows) != n:
        raise ValidationError(f"{path}: expected {n} rows, got {len(rows)}")
    return np.array(rows, dtype=np.float64).reshape(n, d)


def _parse_labels(text, path, n):
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line not in ("0", "1"):
            raise ValidationError(f"{path}:{lineno}: label must be 0 or 1, got {line!r}")
        out.append(int(line))
    if len(out) != n:
        raise ValidationError(f"{path}: expected {n} labels, got {len(out)}")
    return np.array(out, dtype=np.int64)


def load_dataset(dir_path):
    root = Path(dir_path)
    if not root.is_dir():
        raise DataIOError(f"dataset directory not found: {root}")
    try:
        meta = json.loads(_read_text(root / "meta.json"))
        name = str(meta.get("name", root.name))
        n = int(meta["n_nodes"])
        d = int(meta["n_features"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{root / 'meta.json'}: invalid metadata ({exc})") from None
    features = _parse_features(_read_text(root / "features.csv"), root / "features.csv", n, d)
    edges = _parse_edges(_read_text(root / "edges.tsv"), root / "edges.tsv", n)
    labels = None
    if (root / "labels.txt").exists():
        labels = _parse_labels(_read_text(root / "labels.txt"), root / "labels.txt", n)
    return Dataset(name, features, edges, labels).check_anomaly_fraction()


def save_dataset(ds, dir_path):
    root = Path(dir_path)
    try:
        root.mkdir(parents=True, exist_ok=True)
        meta = {"name": ds.name, "n_nodes": ds.n_nodes, "n_features": ds.n_features}
        (root / "meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
        with open(root / "edges.tsv", "w", encoding="utf-8") as fh:
            for u, v in ds.edges.pairs:
                fh.write(f"{u}\t{v}\n")
        with open(root / "features.csv", "w", encoding="utf-8") as fh:
            for row in ds.features:
                fh.write(",".join(format(float(v), ".17g") for v in row) + "\n")
        labels_path = root / "labels.txt"
        if ds.labels is not None:
            labels_path.write_text("".join(f"{int(v)}\n" for v in ds.labels), encoding="utf-8")
        elif labels_path.exists():
            labels_path.unlink()
    except OSError as exc:
        raise DataIOError(f"cannot write dataset to {root}: {exc}") from exc
