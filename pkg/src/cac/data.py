"""Synthetic generators, CSV ingestion, PCA, and input standardization.

All generators draw from ``numpy.random.Generator`` seeded with PCG64, so a
seed pins every fixture bit-exactly across platforms.  Labels are 1-based
consecutive class ids.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .hermite import KernelConfig

__all__ = [
    "Dataset",
    "PcaModel",
    "ScalingRecord",
    "gen_ball_line",
    "gen_two_moons",
    "gen_figure_suite",
    "load_csv",
    "save_assignments",
    "pca_fit_transform",
    "standardize",
]

FIGURE_NAMES = ("bottleneck", "y_clusters", "close_gaussians",
                "disjoint_circles")


@dataclass(frozen=True)
class Dataset:
    """Point cloud with optional ground-truth labels.

    ``labels`` (when present) are consecutive integers ``1..K``.  ``note``
    records how the data came to be (generator parameters or source file).
    """

    points: np.ndarray
    labels: np.ndarray | None
    name: str
    seed: int | None
    note: str

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("points must be a nonempty (M, q) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must have finite coordinates")
        if self.labels is not None:
            lab = np.asarray(self.labels)
            if lab.shape != (pts.shape[0],):
                raise ValueError("labels must align with points")
            uniq = np.unique(lab)
            if uniq[0] < 1 or not np.array_equal(uniq,
                                                 np.arange(1, len(uniq) + 1)):
                raise ValueError("labels must cover 1..K without gaps")

    @property
    def M(self) -> int:
        return self.points.shape[0]

    @property
    def q(self) -> int:
        return self.points.shape[1]

    @property
    def n_classes(self) -> int:
        return 0 if self.labels is None else int(self.labels.max())


def _rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def gen_ball_line(M: int, delta: float, seed) -> Dataset:
    """Uniform disk plus a nearby unit segment.

    ``ceil(2M/3)`` points fall uniformly on the closed unit disk (class 1),
    the rest uniformly on the segment from ``(1 + delta, 0)`` to
    ``(2 + delta, 0)`` (class 2), so ``delta`` is the gap between the two
    structures.
    """
    if M < 3:
        raise ValueError("M must be at least 3")
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    rng = _rng(seed)
    m_disk = math.ceil(2 * M / 3)
    m_line = M - m_disk
    radii = np.sqrt(rng.uniform(0.0, 1.0, m_disk))
    angles = rng.uniform(0.0, 2.0 * math.pi, m_disk)
    disk = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
    xs = rng.uniform(1.0 + delta, 2.0 + delta, m_line)
    line = np.column_stack([xs, np.zeros(m_line)])
    points = np.vstack([disk, line])
    labels = np.concatenate([np.ones(m_disk, dtype=int),
                             np.full(m_line, 2, dtype=int)])
    return Dataset(points, labels, "ball_line", _seed_int(seed),
                   f"disk radius 1 ({m_disk} pts) + unit segment at gap "
                   f"{delta} ({m_line} pts)")


def gen_two_moons(M: int, noise: float, seed) -> Dataset:
    """Two interleaved half-circles with Gaussian jitter.

    Class 1 is the upper arc ``(cos t, sin t)``; class 2 is the lower arc
    shifted by the standard offset, ``(1 - cos t, 0.5 - sin t)``; ``t`` is
    uniform on ``[0, pi]`` and both coordinates get N(0, noise^2) jitter.
    """
    if M < 2:
        raise ValueError("M must be at least 2")
    if noise < 0:
        raise ValueError("noise must be nonnegative")
    rng = _rng(seed)
    m_top = M // 2
    m_bot = M - m_top
    t = rng.uniform(0.0, math.pi, m_top)
    s = rng.uniform(0.0, math.pi, m_bot)
    top = np.column_stack([np.cos(t), np.sin(t)])
    bot = np.column_stack([1.0 - np.cos(s), 0.5 - np.sin(s)])
    points = np.vstack([top, bot])
    if noise > 0:
        points = points + rng.normal(0.0, noise, points.shape)
    labels = np.concatenate([np.ones(m_top, dtype=int),
                             np.full(m_bot, 2, dtype=int)])
    return Dataset(points, labels, "two_moons", _seed_int(seed),
                   f"two moons, noise {noise}")


def _gen_bottleneck(M: int, rng: np.random.Generator) -> np.ndarray:
    """Two mirror-image classes of two dense lumps each, joined by a thin
    sparse tail that crosses the origin: the classes touch (their nearest
    cross-class pairs are closer than a typical within-class neighbor
    spacing), yet every low-density stretch -- between the lumps and at the
    shared neck -- falls below the support threshold, so the dense cores
    come out as four separate pieces.  The strip tapers toward the origin
    so the neck is genuinely narrow.
    """
    m1 = M // 2
    cols = []
    for sign, m in ((-1.0, m1), (1.0, M - m1)):
        m_tail = max(1, int(round(0.025 * m)))
        m_in = (m - m_tail) // 2
        m_out = m - m_tail - m_in
        x = np.concatenate([
            rng.normal(0.9, 0.16, m_in),
            rng.normal(2.6, 0.16, m_out),
            rng.uniform(-0.6, 3.0, m_tail),
        ])
        width = 0.03 + 0.30 * np.clip(np.abs(x) / 3.0, 0.0, 1.0)
        y = rng.normal(0.0, 1.0, m) * width
        cols.append(np.column_stack([sign * x, y]))
    return np.vstack(cols)


def _gen_y_clusters(M: int, rng: np.random.Generator) -> np.ndarray:
    """Three straight arms radiating from near the origin (a 'Y')."""
    arms = np.deg2rad([90.0, 210.0, 330.0])
    out = np.empty((M, 2))
    cls = np.arange(M) % 3
    r = rng.uniform(0.15, 0.15 + 2.2, M)
    theta = arms[cls]
    out[:, 0] = r * np.cos(theta)
    out[:, 1] = r * np.sin(theta)
    out += rng.normal(0.0, 0.02, out.shape)
    return out


def _gen_close_gaussians(M: int, rng: np.random.Generator) -> np.ndarray:
    """Two long horizontal Gaussian strips with a small fixed gap."""
    m1 = M // 2
    sign = np.concatenate([np.ones(m1), -np.ones(M - m1)])
    x = rng.normal(0.0, 2.0, M)
    y = sign * (0.4 + np.abs(rng.normal(0.0, 0.15, M)))
    return np.column_stack([x, y])


def _circle(radius: float, m: int, rng: np.random.Generator) -> np.ndarray:
    """Near-equispaced ring: deterministic angle grid, random phase, tiny
    jitter -- bounds the largest angular gap so graph connectivity along
    the ring is governed by the point count, not sampling luck."""
    phase = rng.uniform(0.0, 1.0)
    ang = 2.0 * math.pi * (np.arange(m) + phase) / m
    pts = radius * np.column_stack([np.cos(ang), np.sin(ang)])
    return pts + rng.normal(0.0, 0.003, pts.shape)


def _gen_disjoint_circles(M: int, rng: np.random.Generator) -> np.ndarray:
    """Two concentric rings whose gap sits between successive graph scales,
    so coarse levels merge them and finer ones separate them cleanly."""
    m1 = M // 2
    return np.vstack([_circle(1.0, m1, rng), _circle(1.19, M - m1, rng)])


def gen_figure_suite(name: str, M: int, seed) -> Dataset:
    """Parametric analogs of the harder qualitative regimes.

    ``bottleneck``: two classes with no separation, joined through a
    low-density neck.  ``y_clusters``: three arms, small separation, flat
    density.  ``close_gaussians``: two wide parallel strips with a gap that
    is tiny compared to their extent.  Shapes encode the regimes, not any
    particular picture.
    """
    if M < 3:
        raise ValueError("M must be at least 3")
    rng = _rng(seed)
    if name == "bottleneck":
        pts = _gen_bottleneck(M, rng)
        # Labels follow the generating class, not the sign of x: the tails
        # overlap through the origin, so the nearest cross-class pairs are
        # closer than a typical within-class neighbor spacing.
        m1 = M // 2
        labels = np.concatenate([np.ones(m1, dtype=int),
                                 np.full(M - m1, 2, dtype=int)])
        note = "four dense lumps joined through a low-density bottleneck"
    elif name == "y_clusters":
        pts = _gen_y_clusters(M, rng)
        labels = (np.arange(M) % 3) + 1
        note = "three arms at 120 degrees, inner radius 0.15"
    elif name == "close_gaussians":
        pts = _gen_close_gaussians(M, rng)
        labels = np.where(pts[:, 1] > 0, 1, 2)
        note = "two wide Gaussian strips, gap 0.8"
    elif name == "disjoint_circles":
        pts = _gen_disjoint_circles(M, rng)
        m1 = M // 2
        labels = np.concatenate([np.ones(m1, dtype=int),
                                 np.full(M - m1, 2, dtype=int)])
        note = "concentric rings, radii 1.0 and 1.19"
    else:
        raise DataError(
            f"unknown figure fixture {name!r}; choose from {FIGURE_NAMES}")
    return Dataset(pts, np.asarray(labels, dtype=int), name,
                   _seed_int(seed), note)


def _seed_int(seed):
    return int(seed) if isinstance(seed, (int, np.integer)) else None


# ---------------------------------------------------------------------------
# CSV ingestion / export
# ---------------------------------------------------------------------------

def _is_integral(text: str) -> bool:
    try:
        v = float(text)
    except ValueError:
        return False
    return math.isfinite(v) and v == int(v)


def load_csv(path, has_labels: bool | None = None) -> Dataset:
    """Read a dataset from CSV: one row per point, numeric columns.

    A single header row is tolerated.  When ``has_labels`` is None the
    final column is treated as class labels iff it is integer-valued in
    every row; pass True/False to override the guess (integer-valued
    coordinates are legal, the heuristic cannot tell them apart).  Raw
    label ids are normalized to consecutive ``1..K``.
    """
    path = Path(path)
    rows: list[list[str]] = []
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path}: no data rows")
    start = 0
    header_like = any(not _is_number(c) for c in rows[0])
    if header_like:
        start = 1
    body = rows[start:]
    if not body:
        raise DataError(f"{path}: no data rows after header")
    width = len(body[0])
    parsed = np.empty((len(body), width))
    for r, row in enumerate(body):
        if len(row) != width:
            raise DataError(
                f"{path}: row {start + r + 1} has {len(row)} cells, expected {width}")
        for c, cell in enumerate(row):
            try:
                parsed[r, c] = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: row {start + r + 1}, column {c + 1}: "
                    f"non-numeric cell {cell.strip()!r}") from None
    if has_labels is None:
        has_labels = width >= 2 and bool(
            np.all(parsed[:, -1] == np.round(parsed[:, -1])))
    labels = None
    points = parsed
    if has_labels:
        if width < 2:
            raise DataError(f"{path}: label column requested but only one column present")
        raw = parsed[:, -1].astype(int)
        points = parsed[:, :-1]
        uniq = np.unique(raw)
        remap = {int(v): k + 1 for k, v in enumerate(uniq)}
        labels = np.array([remap[int(v)] for v in raw], dtype=int)
    if not np.all(np.isfinite(points)):
        raise DataError(f"{path}: non-finite coordinates")
    return Dataset(points, labels, path.stem, None,
                   f"loaded from {path.name}"
                   + ("" if labels is None else f", {len(np.unique(labels))} classes"))


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def save_assignments(path, report) -> None:
    """Write final assignments as CSV.

    Columns: point index, coordinates (17 significant digits), ground
    truth when known, predicted label, confident flag.  ``report`` is a
    run report carrying ``points``, ``predicted``, ``confident_mask`` and
    optionally ``truth``.
    """
    points = np.asarray(report.points, dtype=float)
    predicted = np.asarray(report.predicted, dtype=int)
    confident = np.asarray(report.confident_mask, dtype=bool)
    truth = getattr(report, "truth", None)
    q = points.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        head = ["index"] + [f"x{k}" for k in range(q)]
        if truth is not None:
            head.append("truth")
        head += ["predicted", "confident"]
        writer.writerow(head)
        for i in range(points.shape[0]):
            row = [str(i)] + [_fmt(v) for v in points[i]]
            if truth is not None:
                row.append(str(int(truth[i])))
            row += [str(int(predicted[i])), str(int(confident[i]))]
            writer.writerow(row)


# ---------------------------------------------------------------------------
# preprocessing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PcaModel:
    """Centered orthonormal projection onto the top principal axes."""

    mean: np.ndarray
    axes: np.ndarray            # (q, dim), orthonormal columns
    explained_variance_ratio: np.ndarray
    dim: int

    def transform(self, data) -> np.ndarray:
        return (np.asarray(data, dtype=float) - self.mean) @ self.axes


def pca_fit_transform(data, dim: int) -> tuple[PcaModel, np.ndarray]:
    """Fit PCA and project onto the leading ``dim`` axes.

    Axes are ordered by descending variance; each axis is sign-fixed so its
    largest-magnitude coordinate is positive, which removes the SVD's sign
    ambiguity.  Requesting more axes than the data's rank is an error that
    names the achievable rank.
    """
    X = np.asarray(data, dtype=float)
    if X.ndim != 2:
        raise ValueError("data must be a 2-d array")
    M, q = X.shape
    dim = int(dim)
    if not 1 <= dim <= q:
        raise ValueError(f"dim must lie in [1, {q}], got {dim}")
    mean = X.mean(axis=0)
    centered = X - mean
    U, s, Vt = np.linalg.svd(centered, full_matrices=False)
    tol = s[0] * max(M, q) * np.finfo(float).eps if s.size else 0.0
    rank = int(np.sum(s > tol))
    if dim > rank:
        raise ValueError(
            f"requested {dim} components but the data has rank {rank}; "
            f"at most {rank} achievable")
    axes = Vt[:dim].T.copy()
    for k in range(dim):
        lead = np.argmax(np.abs(axes[:, k]))
        if axes[lead, k] < 0:
            axes[:, k] = -axes[:, k]
    total = float(np.sum(s * s))
    ratios = (s[:dim] * s[:dim]) / total if total > 0 else np.zeros(dim)
    model = PcaModel(mean=mean, axes=axes,
                     explained_variance_ratio=ratios, dim=dim)
    return model, centered @ axes


@dataclass(frozen=True)
class ScalingRecord:
    """Invertible affine rescale applied before kernel evaluation."""

    center: np.ndarray
    scale: float

    def apply(self, data) -> np.ndarray:
        return (np.asarray(data, dtype=float) - self.center) * self.scale

    def invert(self, scaled) -> np.ndarray:
        return np.asarray(scaled, dtype=float) / self.scale + self.center


def standardize(data, config: KernelConfig, kappa: float = 0.5):
    """Center to the coordinate-wise midrange and rescale into the kernel's
    effective domain: after scaling, ``max |coordinate| = kappa * n``
    (constant data is centered only, scale 1).

    Returns ``(scaled, record)`` with ``record.invert`` undoing the map.
    """
    X = np.asarray(data, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("data must be a nonempty 2-d array")
    lo = X.min(axis=0)
    hi = X.max(axis=0)
    center = (lo + hi) / 2.0
    spread = float(np.max(np.abs(X - center))) if X.size else 0.0
    scale = (kappa * config.n / spread) if spread > 0.0 else 1.0
    record = ScalingRecord(center=center, scale=scale)
    return record.apply(X), record
