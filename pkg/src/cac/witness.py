"""Witness-function classification of points outside the confident core.

Each class ``k`` with confident index set ``S_k`` gets a witness

    F_k(x) = (1/|S_k|) * sum_{j in S_k} Phi_n(x, x_j)

using the kernel to the *first* power -- signed and oscillatory, unlike the
squared form used for density.  A point is assigned to the class whose
witness is largest; an optional permutation test converts the winning
margin into a p-value.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hermite import KernelConfig, phi_rows

__all__ = [
    "WitnessModel",
    "witness_values",
    "classify",
    "classify_batch",
    "certainty",
]


@dataclass(frozen=True)
class WitnessModel:
    """Per-class confident index sets plus the kernel that reads them.

    ``class_sets[k]`` holds sample indices for class id ``k + 1``; sets
    must be disjoint and non-empty (a class with no confident points has
    no witness and invalidates the model).
    """

    class_sets: tuple
    config: KernelConfig
    K: int

    def __post_init__(self):
        if self.K != len(self.class_sets) or self.K < 1:
            raise ValueError("model must carry one index set per class")
        seen: set[int] = set()
        for k, idx in enumerate(self.class_sets):
            arr = np.asarray(idx, dtype=int)
            if arr.size == 0:
                raise ValueError(f"class {k + 1} has an empty confident set")
            dup = seen.intersection(arr.tolist())
            if dup:
                raise ValueError(f"confident sets overlap at indices {sorted(dup)}")
            seen.update(arr.tolist())


def _pooled(model: WitnessModel):
    """Concatenated class indices and the segment boundaries per class."""
    parts = [np.asarray(s, dtype=int) for s in model.class_sets]
    sizes = np.array([p.size for p in parts])
    return np.concatenate(parts), np.concatenate([[0], np.cumsum(sizes)]), sizes


def _segment_means(rows: np.ndarray, bounds: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    """Per-class means of kernel rows laid out pool-contiguously."""
    K = sizes.shape[0]
    out = np.empty((rows.shape[0], K))
    for k in range(K):
        out[:, k] = rows[:, bounds[k]:bounds[k + 1]].sum(axis=1) / sizes[k]
    return out


def witness_values(x, model: WitnessModel, samples) -> np.ndarray:
    """Vector of the K per-class witness values at ``x``."""
    pts = np.asarray(samples, dtype=float)
    pool, bounds, sizes = _pooled(model)
    rows = phi_rows(np.asarray(x, dtype=float).reshape(1, -1),
                    pts[pool], model.config)
    return _segment_means(rows, bounds, sizes)[0]


def classify(x, model: WitnessModel, samples) -> int:
    """Class id with the largest witness value; ties go to the lowest id."""
    vals = witness_values(x, model, samples)
    return int(np.argmax(vals)) + 1


def classify_batch(queries, model: WitnessModel, samples):
    """Labels, winning margins and tie flags for many points at once.

    Returns ``(labels, margins, ties)``; ``margins`` is top minus second
    witness value (0.0 when K = 1), ``ties`` flags exact top-two equality
    (resolved toward the lower class id).
    """
    pts = np.asarray(samples, dtype=float)
    Q = np.asarray(queries, dtype=float)
    pool, bounds, sizes = _pooled(model)
    rows = phi_rows(Q, pts[pool], model.config)
    vals = _segment_means(rows, bounds, sizes)
    labels = np.argmax(vals, axis=1) + 1
    if model.K == 1:
        margins = np.zeros(Q.shape[0])
        ties = np.zeros(Q.shape[0], dtype=bool)
    else:
        part = np.sort(vals, axis=1)
        margins = part[:, -1] - part[:, -2]
        ties = margins == 0.0
    return labels.astype(int), margins, ties


def certainty(x, model: WitnessModel, samples, B: int, seed) -> float:
    """Permutation p-value for the classification of ``x``.

    The confident points are pooled and their class memberships reshuffled
    ``B`` times preserving set sizes; the winning margin (top witness minus
    second) is recomputed each time and

        p = (1 + #{permuted margin >= observed}) / (B + 1).

    Small p means the margin is not explained by arbitrary membership.
    ``seed`` may be an int or a tuple such as ``(base_seed, point_index)``
    for reproducible per-point streams.  With a single class there is no
    alternative and p = 1.0 by convention.
    """
    B = int(B)
    if B < 1:
        raise ValueError("B must be >= 1")
    if model.K == 1:
        return 1.0
    pts = np.asarray(samples, dtype=float)
    pool, bounds, sizes = _pooled(model)
    row = phi_rows(np.asarray(x, dtype=float).reshape(1, -1),
                   pts[pool], model.config)[0]
    obs_vals = np.array([
        row[bounds[k]:bounds[k + 1]].sum() / sizes[k] for k in range(model.K)
    ])
    top = np.sort(obs_vals)
    observed = top[-1] - top[-2]
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(B):
        perm = rng.permutation(row.shape[0])
        shuffled = row[perm]
        vals = np.array([
            shuffled[bounds[k]:bounds[k + 1]].sum() / sizes[k]
            for k in range(model.K)
        ])
        t = np.sort(vals)
        if t[-1] - t[-2] >= observed:
            hits += 1
    return (1 + hits) / (B + 1)
