"""Clustering and classification quality measures.

The F-score here is the size-weighted best-match overlap between produced
clusters and ground-truth label sets: dropped points are invisible to it,
so it isolates fragmentation and merging errors from coverage.  Accuracy
measures complement it on full assignments.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Scorecard", "cluster_f", "micro_f", "accuracy_suite"]


@dataclass(frozen=True)
class Scorecard:
    """Bundle of quality scores for one finished run.

    ``unassigned_count`` tracks points that never received a label (budget
    exhaustion); they are already counted as errors in every accuracy
    figure, this field just makes them visible.
    """

    micro_f: float
    accuracy: float
    worst_class_accuracy: float
    per_cluster_f: list
    confident_accuracy: float
    confident_fraction: float
    unassigned_count: int = 0


def _as_index_set(x) -> np.ndarray:
    return np.unique(np.asarray(x, dtype=int))


def cluster_f(cluster, label_sets) -> float:
    """Best-match F-score of one cluster against the label sets:
    ``2 * max_k |C ∩ L_k| / (|C| + |L_k|)``.
    """
    C = _as_index_set(cluster)
    if C.size == 0:
        raise ValueError("cluster must be non-empty")
    best = 0.0
    for L in label_sets:
        Lk = _as_index_set(L)
        inter = np.intersect1d(C, Lk, assume_unique=True).size
        denom = C.size + Lk.size
        if denom > 0:
            best = max(best, 2.0 * inter / denom)
    return best


def micro_f(clusters, label_sets) -> float:
    """Size-weighted mean of :func:`cluster_f` over disjoint clusters.

    Points in no cluster simply carry no weight; a run that drops points
    is penalized through coverage metrics, not here.
    """
    sets = [_as_index_set(c) for c in clusters]
    total = sum(s.size for s in sets)
    if total == 0:
        return 0.0
    seen = np.concatenate(sets) if sets else np.empty(0, dtype=int)
    if np.unique(seen).size != seen.size:
        raise ValueError("clusters must be disjoint")
    return sum(s.size * cluster_f(s, label_sets) for s in sets) / total


def accuracy_suite(assignments, truth, confident_set, clusters=None) -> Scorecard:
    """Score a full assignment against ground truth.

    ``assignments[i] <= 0`` means "never labeled" and counts as an error
    everywhere.  Per-class accuracy is computed over the truth classes and
    its minimum reported; a truth class the assignment never emits scores 0
    there.  When ``clusters`` is omitted the predicted label groups act as
    the clusters for the F-score.
    """
    pred = np.asarray(assignments, dtype=int)
    t = np.asarray(truth, dtype=int)
    if pred.shape != t.shape:
        raise ValueError("assignments and truth must align")
    M = t.shape[0]
    correct = pred == t
    accuracy = float(np.mean(correct)) if M else 0.0
    class_ids = np.unique(t)
    per_class = [float(np.mean(correct[t == k])) for k in class_ids]
    worst = min(per_class) if per_class else 0.0
    conf = _as_index_set(confident_set)
    if conf.size:
        confident_accuracy = float(np.mean(correct[conf]))
    else:
        confident_accuracy = 0.0
    label_sets = [np.flatnonzero(t == k) for k in class_ids]
    if clusters is None:
        clusters = [np.flatnonzero(pred == k) for k in np.unique(pred) if k > 0]
        clusters = [c for c in clusters if c.size]
    per_f = [cluster_f(c, label_sets) for c in clusters if len(c)]
    return Scorecard(
        micro_f=micro_f(clusters, label_sets) if clusters else 0.0,
        accuracy=accuracy,
        worst_class_accuracy=worst,
        per_cluster_f=per_f,
        confident_accuracy=confident_accuracy,
        confident_fraction=conf.size / M if M else 0.0,
        unassigned_count=int(np.sum(pred <= 0)),
    )
