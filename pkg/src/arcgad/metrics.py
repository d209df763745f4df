"""Threshold-free ranking metrics with exact tie handling."""
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class ScoredLabels:
    scores: np.ndarray
    labels: np.ndarray

    @classmethod
    def make(cls, scores, labels):
        scores = np.asarray(scores, dtype=np.float64).ravel()
        labels = np.asarray(labels).ravel()
        if scores.shape != labels.shape:
            raise ValidationError(f"{scores.size} scores for {labels.size} labels")
        if not np.isfinite(scores).all():
            raise ValidationError("scores must be finite")
        if not np.isin(labels, (0, 1)).all():
            raise ValidationError("labels must be 0/1")
        return cls(scores, labels.astype(np.int64))


def _average_ranks(x):
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    starts = np.flatnonzero(np.r_[True, xs[1:] != xs[:-1]])
    ends = np.r_[starts[1:], xs.size]
    avg = (starts + ends + 1) / 2.0  # 1-based mean rank of each tie block
    ranks = np.empty(x.size)
    ranks[order] = np.repeat(avg, ends - starts)
    return ranks


def auroc(scores, labels):
    """P(score_pos > score_neg) + 0.5 * P(tie), via the Mann-Whitney U statistic."""
    sl = ScoredLabels.make(scores, labels)
    n_pos = int(sl.labels.sum())
    n_neg = sl.labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("AUROC needs at least one positive and one negative label")
    ranks = _average_ranks(sl.scores)
    u = ranks[sl.labels == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def auprc(scores, labels):
    """Average precision; each group of tied scores is one threshold."""
    sl = ScoredLabels.make(scores, labels)
    n_pos = int(sl.labels.sum())
    if n_pos == 0:
        raise ValidationError("AUPRC needs at least one positive label")
    order = np.argsort(-sl.scores, kind="mergesort")
    s = sl.scores[order]
    y = sl.labels[order]
    group_end = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    tp = np.cumsum(y)[group_end]
    seen = group_end + 1
    precision = tp / seen
    d_recall = np.diff(np.r_[0, tp]) / n_pos
    return float((d_recall * precision).sum())
