"""Generators, CSV round-trips, PCA and standardization."""
import math

import numpy as np
import numpy.testing as npt
import pytest
from scipy.optimize import linprog
from scipy.spatial.distance import cdist

from cac import (DataError, Dataset, KernelConfig, gen_ball_line,
                 gen_figure_suite, gen_two_moons, load_csv,
                 median_nearest_neighbor, pca_fit_transform,
                 save_assignments, standardize)


# ---------------------------------------------------------------------------
# ball + line


def test_ball_line_proportions_and_labels():
    ds = gen_ball_line(1000, 0.2, seed=1)
    n_disk = math.ceil(2 * 1000 / 3)
    assert ds.points.shape == (1000, 2)
    assert int(np.sum(ds.labels == 1)) == n_disk
    assert int(np.sum(ds.labels == 2)) == 1000 - n_disk
    disk = ds.points[ds.labels == 1]
    seg = ds.points[ds.labels == 2]
    assert np.all(np.hypot(disk[:, 0], disk[:, 1]) <= 1.0 + 1e-12)
    assert np.allclose(seg[:, 1], 0.0)


def test_ball_line_touching_when_delta_zero():
    # the construction touches; the sampled gap is pure O(1/sqrt(M)) slack
    ds = gen_ball_line(1000, 0.0, seed=4)
    gap = cdist(ds.points[ds.labels == 1], ds.points[ds.labels == 2]).min()
    assert gap < 0.1
    ds2 = gen_ball_line(1000, 0.2, seed=4)
    gap2 = cdist(ds2.points[ds2.labels == 1], ds2.points[ds2.labels == 2]).min()
    assert gap < gap2


def test_ball_line_gap_tracks_delta():
    ds = gen_ball_line(1000, 0.2, seed=4)
    gap = cdist(ds.points[ds.labels == 1], ds.points[ds.labels == 2]).min()
    assert 0.2 <= gap <= 0.25      # delta plus O(1/sqrt(M)) sampling slack


def test_generators_deterministic_in_seed():
    a = gen_ball_line(200, 0.1, seed=5)
    b = gen_ball_line(200, 0.1, seed=5)
    c = gen_ball_line(200, 0.1, seed=6)
    npt.assert_array_equal(a.points, b.points)
    assert not np.array_equal(a.points, c.points)
    assert a.seed == 5 and a.name == "ball_line"


# ---------------------------------------------------------------------------
# two moons


def test_moons_noise_zero_sits_on_the_half_circles():
    ds = gen_two_moons(600, 0.0, seed=2)
    top = ds.points[ds.labels == 1]
    bot = ds.points[ds.labels == 2]
    npt.assert_allclose(top[:, 0] ** 2 + top[:, 1] ** 2, 1.0, atol=1e-12)
    # lower arc: reflected unit circle through the standard offset point
    # (1, -0.5) at its bottom
    npt.assert_allclose((bot[:, 0] - 1.0) ** 2 + (bot[:, 1] - 0.5) ** 2, 1.0,
                        atol=1e-12)
    assert np.all(top[:, 1] >= -1e-12)
    assert np.all((bot[:, 1] >= -0.5 - 1e-12) & (bot[:, 1] <= 0.5 + 1e-12))
    assert bot[:, 1].min() < -0.4       # the arc actually reaches the offset


def test_moons_not_linearly_separable():
    # LP feasibility of y_i (w.x_i + b) >= 1 decides separability exactly
    ds = gen_two_moons(200, 0.0, seed=0)
    y = np.where(ds.labels == 1, 1.0, -1.0)
    A = -(y[:, None] * np.column_stack([ds.points, np.ones(len(y))]))
    res = linprog(c=[0.0, 0.0, 0.0], A_ub=A, b_ub=-np.ones(len(y)),
                  bounds=[(None, None)] * 3, method="highs")
    assert not res.success


def test_moons_split_sizes():
    ds = gen_two_moons(601, 0.05, seed=1)
    assert int(np.sum(ds.labels == 1)) == 300
    assert int(np.sum(ds.labels == 2)) == 301


# ---------------------------------------------------------------------------
# figure suite


def test_y_clusters_has_three_balanced_classes():
    ds = gen_figure_suite("y_clusters", 900, seed=5)
    assert sorted(np.unique(ds.labels)) == [1, 2, 3]
    counts = [int(np.sum(ds.labels == k)) for k in (1, 2, 3)]
    assert max(counts) - min(counts) <= 1


def test_close_gaussians_two_classes_with_a_gap():
    ds = gen_figure_suite("close_gaussians", 800, seed=3)
    assert sorted(np.unique(ds.labels)) == [1, 2]
    top = ds.points[ds.labels == 1]
    bot = ds.points[ds.labels == 2]
    assert top[:, 1].min() >= 0.4 - 1e-12
    assert bot[:, 1].max() <= -0.4 + 1e-12


def test_bottleneck_classes_touch():
    # the defining regime: nearest cross-class pairs sit closer than a
    # typical within-class neighbor spacing
    ds = gen_figure_suite("bottleneck", 1000, seed=7)
    pts, lab = ds.points, ds.labels
    inf_inter = cdist(pts[lab == 1], pts[lab == 2]).min()
    med_intra = min(median_nearest_neighbor(pts[lab == 1]),
                    median_nearest_neighbor(pts[lab == 2]))
    assert inf_inter < med_intra


def test_disjoint_circles_radii():
    ds = gen_figure_suite("disjoint_circles", 1000, seed=5)
    r = np.hypot(ds.points[:, 0], ds.points[:, 1])
    inner = r[ds.labels == 1]
    outer = r[ds.labels == 2]
    assert abs(np.median(inner) - 1.0) < 0.01
    assert abs(np.median(outer) - 1.19) < 0.01


def test_figure_suite_rejects_unknown_name():
    with pytest.raises(DataError, match="unknown figure"):
        gen_figure_suite("spiral", 100, seed=0)


# ---------------------------------------------------------------------------
# CSV in / out


def test_csv_round_trip_preserves_coordinates(tmp_path):
    rng = np.random.default_rng(11)
    pts = rng.uniform(-5, 5, (40, 3))
    pred = rng.integers(1, 4, 40)
    truth = rng.integers(1, 4, 40)
    conf = rng.uniform(0, 1, 40) > 0.5
    report = type("R", (), {"points": pts, "predicted": pred,
                            "truth": truth, "confident_mask": conf})
    out = tmp_path / "assign.csv"
    save_assignments(out, report)
    ds = load_csv(out)
    # columns: index, x0..x2, truth, predicted, confident -> coords at 1:4
    npt.assert_array_equal(ds.points[:, 1:4], pts)


def test_csv_header_and_label_normalization(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("x,y,label\n0.5,1.5,10\n1.0,2.0,30\n1.5,2.5,10\n")
    ds = load_csv(f)
    assert ds.labels is not None
    assert list(ds.labels) == [1, 2, 1]      # 10,30 -> 1,2
    assert ds.points.shape == (3, 2)


def test_csv_label_autodetect_override(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("1.0,2\n2.0,3\n")
    assert load_csv(f).labels is not None            # integral last column
    ds = load_csv(f, has_labels=False)
    assert ds.labels is None
    assert ds.points.shape == (2, 2)


def test_csv_empty_and_malformed_errors(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(DataError, match="no data rows"):
        load_csv(empty)
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("1.0,2.0\n3.0\n")
    with pytest.raises(DataError, match="row 2"):
        load_csv(ragged)
    bad = tmp_path / "bad.csv"
    bad.write_text("1.0,2.0\n3.0,oops\n")
    with pytest.raises(DataError, match="row 2, column 2"):
        load_csv(bad)
    with pytest.raises(DataError, match="cannot read"):
        load_csv(tmp_path / "missing.csv")


def test_hsi_style_wide_matrix_loads_and_reduces(tmp_path):
    # same shape as the 204-band airborne scene: wide rows, final label col
    rng = np.random.default_rng(0)
    M, bands = 7138, 204
    base = rng.normal(size=(M, 6)) @ rng.normal(size=(6, bands))
    data = base + 0.01 * rng.normal(size=(M, bands))
    labels = rng.integers(1, 7, M)
    f = tmp_path / "scene.csv"
    rows = [",".join(f"{v:.6g}" for v in data[i]) + f",{labels[i]}"
            for i in range(M)]
    f.write_text("\n".join(rows) + "\n")
    ds = load_csv(f)
    assert ds.points.shape == (M, bands)
    assert ds.labels is not None
    model, reduced = pca_fit_transform(ds.points, 10)
    assert reduced.shape == (M, 10)
    assert model.explained_variance_ratio.shape == (10,)


# ---------------------------------------------------------------------------
# PCA


def test_pca_recovers_embedded_subspace():
    rng = np.random.default_rng(3)
    latent = rng.normal(size=(300, 2))
    embed = rng.normal(size=(2, 5))
    data = latent @ embed + 7.0
    model, proj = pca_fit_transform(data, 2)
    recon = proj @ model.axes.T + model.mean
    npt.assert_allclose(recon, data, atol=1e-10)


def test_pca_axes_orthonormal_and_ratios_sorted():
    rng = np.random.default_rng(5)
    data = rng.normal(size=(400, 6)) * np.array([5, 3, 2, 1, 0.5, 0.1])
    model, _ = pca_fit_transform(data, 4)
    gram = model.axes.T @ model.axes
    npt.assert_allclose(gram, np.eye(4), atol=1e-10)
    ratios = model.explained_variance_ratio
    assert np.all(np.diff(ratios) <= 1e-12)
    assert ratios.sum() <= 1.0 + 1e-12


def test_pca_isotropic_ratios_near_uniform():
    rng = np.random.default_rng(7)
    data = rng.normal(size=(4000, 5))
    model, _ = pca_fit_transform(data, 5)
    npt.assert_allclose(model.explained_variance_ratio, 0.2, atol=0.1)


def test_pca_sign_convention():
    rng = np.random.default_rng(9)
    data = rng.normal(size=(100, 3)) * np.array([4, 2, 1])
    model, _ = pca_fit_transform(data, 3)
    for j in range(3):
        axis = model.axes[:, j]
        assert axis[int(np.argmax(np.abs(axis)))] > 0


def test_pca_preserves_distances_at_full_dimension():
    rng = np.random.default_rng(13)
    data = rng.normal(size=(60, 4))
    _, proj = pca_fit_transform(data, 4)
    npt.assert_allclose(cdist(proj, proj), cdist(data, data), atol=1e-10)


def test_pca_rank_error_names_achievable_rank():
    data = np.zeros((50, 4))
    data[:, 0] = np.arange(50)         # rank 1 after centering
    with pytest.raises(ValueError, match="rank 1"):
        pca_fit_transform(data, 3)
    with pytest.raises(ValueError):
        pca_fit_transform(np.random.default_rng(0).normal(size=(10, 3)), 4)


# ---------------------------------------------------------------------------
# standardization


def test_standardize_cube_example():
    rng = np.random.default_rng(1)
    data = rng.uniform(-1, 1, (300, 2))
    data[0] = [-1.0, 0.3]
    data[1] = [1.0, -0.7]              # pin the midrange and spread exactly
    scaled, record = standardize(data, KernelConfig(n=6, q=2))
    npt.assert_allclose(record.scale, 3.0, rtol=1e-12)
    assert np.max(np.abs(scaled)) <= 3.0 + 1e-12


def test_standardize_round_trip():
    rng = np.random.default_rng(2)
    data = rng.uniform(-40, 17, (80, 3))
    scaled, record = standardize(data, KernelConfig(n=4, q=3))
    npt.assert_allclose(record.invert(scaled), data, rtol=1e-12, atol=1e-12)


def test_standardize_single_point_centers_to_origin():
    data = np.array([[3.0, -2.0]])
    scaled, record = standardize(data, KernelConfig(n=4, q=2))
    npt.assert_array_equal(scaled, [[0.0, 0.0]])
    assert record.scale == 1.0


def test_dataset_validates_labels_and_shape():
    pts = np.zeros((4, 2))
    ds = Dataset(pts, np.array([1, 2, 1, 2]), "toy", 0, "")
    assert ds.M == 4 and ds.q == 2 and ds.n_classes == 2
    with pytest.raises(ValueError):
        Dataset(pts, np.array([1, 2, 1]), "toy", 0, "")
    with pytest.raises(ValueError):
        Dataset(np.array([[np.nan, 0.0]]), None, "toy", 0, "")
