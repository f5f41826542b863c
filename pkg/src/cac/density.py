"""Empirical density fields and thresholded support sets.

The squared localized kernel averaged over the sample,

    f_n(x) = (1/M) * sum_j Phi_n(x, x_j)**2,

concentrates on the support of the sampling distribution and decays at the
kernel's localization rate away from it.  Thresholding the field at a
fraction ``theta`` of its maximum over the sample yields the high-density
point set that the clustering stages operate on.  A plain Gaussian KDE is
included as the comparison baseline; its level sets bleed much further past
the support than the localized field's do.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .hermite import KernelConfig, kernel_matrix, phi_rows

__all__ = [
    "DensityField",
    "SupportSet",
    "density_at",
    "density_field",
    "support_set",
    "gaussian_kde_baseline",
]


@dataclass(frozen=True)
class DensityField:
    """Density estimates evaluated at the sample points themselves.

    ``values[i]`` is the field at sample ``i``; ``sample_max`` is its
    maximum over the sample, the reference level all thresholds are
    relative to.  ``config`` is the kernel configuration that produced the
    field (``None`` for the KDE baseline).
    """

    values: np.ndarray
    sample_max: float
    config: KernelConfig | None
    point_count: int


@dataclass(frozen=True)
class SupportSet:
    """Sample indices whose density clears ``threshold * sample_max``.

    ``threshold`` is the relative level in ``(0, 1]``; ``members`` and
    ``complement`` partition ``range(point_count)``, both ascending.
    """

    threshold: float
    members: np.ndarray
    complement: np.ndarray


def density_at(x, samples, config: KernelConfig) -> float:
    """Field value ``(1/M) * sum_j Phi_n(x, samples[j])**2`` at one point.

    Exactly the scalar version of :func:`density_field`: the same kernel
    core and the same summation order, so evaluating at a sample point
    reproduces that point's field entry bit for bit.
    """
    pts = np.asarray(samples, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ValueError("samples must be a nonempty (M, q) array")
    row = phi_rows(np.asarray(x, dtype=float).reshape(1, -1), pts, config)
    return float(np.sum(row * row, axis=1)[0] / pts.shape[0])


def density_field(samples, config: KernelConfig) -> DensityField:
    """Evaluate the field at every sample point via the kernel matrix.

    Memory-capped like :func:`cac.hermite.kernel_matrix` (the error
    propagates); for larger samples evaluate :func:`density_at` over index
    blocks instead.
    """
    pts = np.asarray(samples, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ValueError("samples must be a nonempty (M, q) array")
    K = kernel_matrix(pts, config)
    values = np.sum(K * K, axis=1) / pts.shape[0]
    return DensityField(values=values, sample_max=float(values.max()),
                        config=config, point_count=pts.shape[0])


def support_set(field: DensityField, theta: float) -> SupportSet:
    """Indices whose value is at least ``theta * sample_max`` (inclusive).

    Points sitting exactly on the level are members -- the defining
    inequality is not strict.
    """
    theta = float(theta)
    if not (0.0 < theta <= 1.0):
        raise ValueError(f"theta must lie in (0, 1], got {theta!r}")
    cut = theta * field.sample_max
    members = np.flatnonzero(field.values >= cut)
    complement = np.flatnonzero(field.values < cut)
    return SupportSet(threshold=theta, members=members, complement=complement)


def gaussian_kde_baseline(samples, bandwidth: float) -> DensityField:
    """Standard Gaussian kernel density estimate at the sample points.

    values[i] = (1/M) * sum_j exp(-|x_i - x_j|^2 / (2 s^2)) / (2 pi s^2)^(q/2)

    The normalization is cosmetic for thresholding purposes (level sets are
    scale-free) but keeps the numbers interpretable as densities.
    """
    bandwidth = float(bandwidth)
    if not (bandwidth > 0.0 and math.isfinite(bandwidth)):
        raise ValueError(f"bandwidth must be positive, got {bandwidth!r}")
    pts = np.asarray(samples, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ValueError("samples must be a nonempty (M, q) array")
    M, q = pts.shape
    sq = cdist(pts, pts, metric="sqeuclidean")
    norm = (2.0 * math.pi * bandwidth * bandwidth) ** (q / 2.0)
    values = np.sum(np.exp(-sq / (2.0 * bandwidth * bandwidth)), axis=1) / (M * norm)
    return DensityField(values=values, sample_max=float(values.max()),
                        config=None, point_count=M)
