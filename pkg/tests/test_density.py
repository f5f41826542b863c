"""Density field, thresholded support membership, and the KDE baseline."""
import math

import numpy as np
import numpy.testing as npt
import pytest

from cac import (KernelConfig, KernelSizeError, density_at, density_field,
                 gaussian_kde_baseline, gen_ball_line, gen_two_moons, phi_n,
                 support_set)


def brute_density(x, samples, config):
    """Small-M oracle: literal mean of squared scalar kernel calls."""
    vals = [phi_n(x, s, config) ** 2 for s in samples]
    return sum(vals) / len(samples)


def test_density_at_matches_brute_force():
    rng = np.random.default_rng(2)
    samples = rng.uniform(-1.5, 1.5, (6, 2))
    config = KernelConfig(n=4, q=2)
    for x in samples[:3]:
        npt.assert_allclose(density_at(x, samples, config),
                            brute_density(x, samples, config), rtol=1e-12)


def test_density_single_sample_self_term():
    config = KernelConfig(n=5, q=2)
    x = np.array([0.3, -0.8])
    field = density_field(x[None, :], config)
    expected = phi_n(x, x, config) ** 2
    assert field.values.shape == (1,)
    npt.assert_allclose(field.values[0], expected, rtol=1e-15)
    assert field.sample_max == field.values[0]
    assert field.point_count == 1


def test_density_permutation_invariant():
    rng = np.random.default_rng(8)
    samples = rng.uniform(-1, 1, (10, 2))
    config = KernelConfig(n=3, q=2)
    x = np.array([0.1, 0.2])
    a = density_at(x, samples, config)
    b = density_at(x, samples[::-1], config)
    npt.assert_allclose(a, b, rtol=1e-13)


def test_field_equals_scalar_path_exactly():
    # both paths share one pairwise evaluation core, so this is bit equality
    rng = np.random.default_rng(21)
    samples = rng.uniform(-2, 2, (12, 2))
    config = KernelConfig(n=4, q=2)
    field = density_field(samples, config)
    for i in range(len(samples)):
        assert field.values[i] == density_at(samples[i], samples, config)
    assert field.sample_max == field.values.max()


def test_field_self_term_lower_bound():
    rng = np.random.default_rng(4)
    samples = rng.uniform(-2, 2, (15, 2))
    config = KernelConfig(n=4, q=2)
    field = density_field(samples, config)
    M = len(samples)
    for i in range(M):
        self_term = phi_n(samples[i], samples[i], config) ** 2 / M
        assert field.values[i] >= self_term > 0.0


def test_moons_interior_dominates_off_manifold():
    ds = gen_two_moons(1000, 0.05, seed=3)
    config = KernelConfig(n=6, q=2)
    interior = np.array([0.0, 1.0])          # top of the first arc
    off = interior + np.array([0.0, 0.5])    # 0.5 units off the curve
    hi = density_at(interior, ds.points, config)
    lo = density_at(off, ds.points, config)
    assert hi / lo >= 10.0


def test_ball_line_max_in_region_interior():
    ds = gen_ball_line(1000, 0.2, seed=9)
    config = KernelConfig(n=7, q=2)
    field = density_field(ds.points, config)
    peak = ds.points[int(np.argmax(field.values))]
    r = math.hypot(*peak)
    if r <= 1.0:
        assert r < 0.95, "max should sit inside the disk, not on its rim"
    else:
        assert 1.3 < peak[0] < 2.1 and abs(peak[1]) < 1e-9


# ---------------------------------------------------------------------------
# support sets


def _toy_field(values):
    samples = np.zeros((len(values), 1))
    field = density_field(samples[:1], KernelConfig(n=1, q=1))
    # rebuild with handpicked values but a legitimate config
    from cac import DensityField
    values = np.asarray(values, dtype=float)
    return DensityField(values=values, sample_max=float(values.max()),
                        config=field.config, point_count=len(values))


def test_support_threshold_zero_limit_keeps_everything():
    field = _toy_field([0.5, 1.0, 1e-9])
    sup = support_set(field, 1e-12)
    assert list(sup.members) == [0, 1, 2]
    assert list(sup.complement) == []


def test_support_membership_is_inclusive_at_the_boundary():
    field = _toy_field([0.25, 1.0, 0.2499999])
    sup = support_set(field, 0.25)
    assert 0 in sup.members          # exactly theta * max stays a member
    assert 2 in sup.complement


def test_support_sets_nest_as_theta_grows():
    rng = np.random.default_rng(12)
    field = _toy_field(rng.uniform(0.01, 1.0, 50))
    prev = set(support_set(field, 0.05).members)
    for theta in (0.1, 0.3, 0.6, 0.9, 1.0):
        cur = set(support_set(field, theta).members)
        assert cur <= prev
        prev = cur


def test_support_partition_and_validation():
    field = _toy_field([0.3, 0.9, 0.4, 1.0])
    sup = support_set(field, 0.5)
    assert sorted(list(sup.members) + list(sup.complement)) == [0, 1, 2, 3]
    assert sup.threshold == 0.5
    for bad in (0.0, -0.1, 1.1):
        with pytest.raises(ValueError):
            support_set(field, bad)


def test_support_inclusion_on_a_uniform_square():
    # interior of the support should be picked up wholesale at low theta,
    # and nothing a unit outside the square should ever be a member
    rng = np.random.default_rng(6)
    M, n = 1200, 6.0
    pts = rng.uniform(-1.0, 1.0, (M, 2))
    config = KernelConfig(n=n, q=2)
    field = density_field(pts, config)
    sup = support_set(field, 0.1)
    members = set(int(i) for i in sup.members)
    margin = 2.0 / n
    interior = [i for i in range(M)
                if np.all(np.abs(pts[i]) <= 1.0 - margin)]
    missing = [i for i in interior if i not in members]
    assert not missing, f"{len(missing)} interior points dropped"
    cut = sup.threshold * field.sample_max
    for far in ([2.2, 0.0], [0.0, -2.4], [2.1, 2.1]):
        assert density_at(np.array(far), pts, config) < cut


# ---------------------------------------------------------------------------
# KDE baseline and size propagation


def test_kde_coincident_samples_closed_form():
    pts = np.tile([[0.4, 0.6]], (5, 1))
    bw = 0.25
    field = gaussian_kde_baseline(pts, bw)
    expected = 1.0 / (2.0 * math.pi * bw * bw)
    npt.assert_allclose(field.values, expected, rtol=1e-13)
    assert field.config is None


def test_kde_positive_and_peaked_on_data():
    rng = np.random.default_rng(9)
    pts = np.vstack([rng.normal(0, 0.1, (50, 2)), rng.normal(4, 0.1, (5, 2))])
    field = gaussian_kde_baseline(pts, 0.3)
    assert np.all(field.values > 0)
    # the dense blob holds the maximum
    assert int(np.argmax(field.values)) < 50
    with pytest.raises(ValueError):
        gaussian_kde_baseline(pts, 0.0)


def test_density_field_propagates_size_error():
    # the cap check fires before any allocation, so a huge M is cheap
    pts = np.zeros((20000, 1))
    with pytest.raises(KernelSizeError):
        density_field(pts, KernelConfig(n=1, q=1))
