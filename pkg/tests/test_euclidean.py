"""Generators, halfspace masses, marginals, and the combination test."""

import math

import numpy as np
import pytest

from grunbaum import (
    ConcavityClass,
    GridDensityND,
    Halfspace,
    SampleCloud,
    barycenter_nd,
    check_class,
    cone_uniform,
    gaussian,
    halfspace_mass,
    make_rng,
    marginal_1d,
    minkowski_test,
    normalize,
    polygon_grid_density,
    recenter,
    uniform_polytope,
    uniform_simplex,
    verify_grunbaum_1d,
)

TRIANGLE = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]


def test_sample_cloud_validation():
    with pytest.raises(ValueError):
        SampleCloud(np.zeros((0, 2)))
    with pytest.raises(ValueError):
        SampleCloud(np.zeros((3, 2)), weights=np.array([1.0, -1.0, 1.0]))
    c = SampleCloud(np.zeros((4, 3)))
    assert c.weights.sum() == pytest.approx(1.0)


def test_simplex_centroid(rng):
    cloud = uniform_simplex(2, 120_000, rng)
    assert barycenter_nd(cloud) == pytest.approx([1 / 3, 1 / 3], abs=5e-3)


def test_gaussian_mean_recovery(rng):
    m = 50_000
    cloud = gaussian([2.0, -1.0], [[1.0, 0.2], [0.2, 0.5]], m, rng)
    # 3 sigma / sqrt(m) law-of-large-numbers contract
    assert np.all(np.abs(barycenter_nd(cloud) - [2.0, -1.0]) < 3.0 / math.sqrt(m) + 1e-2)


def test_gaussian_rejects_bad_covariance(rng):
    with pytest.raises(ValueError):
        gaussian([0, 0], [[1.0, 2.0], [2.0, 1.0]], 10, rng)


def test_cone_uniform_centroid(rng):
    # triangle as a cone over the unit segment: barycenter 1/3 up from base
    cloud = cone_uniform([[0.0, 0.0], [1.0, 0.0]], [0.5, 1.0], 200_000, rng)
    b = barycenter_nd(cloud)
    assert b[1] == pytest.approx(1 / 3, abs=5e-3)
    assert b[0] == pytest.approx(0.5, abs=5e-3)


def test_uniform_polytope_square(rng):
    cloud = uniform_polytope(np.array([[0, 0], [1, 0], [0, 1], [1, 1]], float), 50_000, rng)
    assert barycenter_nd(cloud) == pytest.approx([0.5, 0.5], abs=8e-3)
    with pytest.raises(Exception):
        uniform_polytope(np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]), 10, rng)


def test_halfspace_validation_and_membership():
    with pytest.raises(ValueError):
        Halfspace([0.0, 0.0], 1.0)
    hs = Halfspace([0.0, 2.0], 0.5, "ge")
    assert np.linalg.norm(hs.direction) == pytest.approx(1.0)
    assert hs.contains(np.array([[0.0, 0.5], [0.0, 0.49]])).tolist() == [True, False]


def test_halfspace_complement_identity(rng):
    cloud = uniform_simplex(2, 20_000, rng)
    le = halfspace_mass(cloud, Halfspace([0.3, 0.7], 0.4, "le"))
    ge = halfspace_mass(cloud, Halfspace([0.3, 0.7], 0.4, "ge"))
    assert le + ge >= 1.0 - 1e-12  # equality unless atoms sit on the boundary


def test_triangle_halfspace_through_centroid(rng):
    # halfspace parallel to a side on the apex side: (2/3)^2 of the area
    cloud = uniform_simplex(2, 400_000, rng)
    mass = halfspace_mass(cloud, Halfspace([0.0, 1.0], 1 / 3, "ge"))
    assert mass == pytest.approx(4 / 9, abs=4e-3)


def test_gaussian_halfspace_through_mean(rng):
    cloud = gaussian([0.0, 0.0], np.eye(2), 200_000, rng)
    assert halfspace_mass(cloud, Halfspace([1.0, 1.0], 0.0, "le")) == pytest.approx(0.5, abs=5e-3)


# -- grid densities -----------------------------------------------------------


def test_polygon_rasterization_mass_and_centroid():
    gd = polygon_grid_density(TRIANGLE, np.linspace(0, 1, 257), np.linspace(0, 1, 257))
    assert gd.mass == pytest.approx(1.0, abs=1e-12)
    assert barycenter_nd(gd) == pytest.approx([1 / 3, 1 / 3], abs=1e-6)


def test_grid_halfspace_mass():
    gd = polygon_grid_density(TRIANGLE, np.linspace(0, 1, 513), np.linspace(0, 1, 513))
    assert halfspace_mass(gd, Halfspace([0, 1], 1 / 3, "ge")) == pytest.approx(4 / 9, abs=1e-4)
    assert halfspace_mass(gd, Halfspace([1, 1], 2 / 3, "le")) == pytest.approx(
        1 - (1 / 3) ** 2, abs=2e-3
    )


def test_box_mass_exactness():
    gd = GridDensityND((np.linspace(0, 1, 33), np.linspace(0, 1, 33)), np.ones((32, 32)))
    assert gd.box_mass([0.1, 0.2], [0.6, 0.9]) == pytest.approx(0.5 * 0.7, abs=1e-14)


def test_grid_density_validation():
    with pytest.raises(ValueError):
        GridDensityND((np.array([0.0, 1.0, 0.5]),), np.ones(2))
    with pytest.raises(ValueError):
        GridDensityND((np.array([0.0, 1.0]),), -np.ones(1))


# -- marginals ----------------------------------------------------------------


def test_grid_marginal_along_axis_is_exact_slice_profile():
    gd = polygon_grid_density(TRIANGLE, np.linspace(0, 1, 257), np.linspace(0, 1, 257))
    marg = marginal_1d(gd, [1.0, 0.0], s=0.5)
    # slice length of the standard triangle at x is (1 - x): affine density
    xs = marg.density.knots
    expected = 2.0 * (1.0 - xs)  # normalized: area 1/2 -> density 2(1-x)
    assert marg.density(xs) == pytest.approx(expected, abs=1e-10)
    rep = check_class(marg.density, marg.expected_class, tol=1e-6)
    assert rep.passed and rep.worst_violation < 1e-12


def test_separable_marginal_recovers_factor(rng):
    # product density w(x)g(y) on a grid: the x-marginal is w up to scale
    xs = np.linspace(-1, 1, 129)
    ys = np.linspace(0, 1, 65)
    cx = 0.5 * (xs[:-1] + xs[1:])
    cy = 0.5 * (ys[:-1] + ys[1:])
    w = 1.0 - 0.5 * np.abs(cx)
    gfac = 1.0 + cy
    gd = GridDensityND((xs, ys), np.outer(w, gfac)).normalized()
    marg = marginal_1d(gd, [1.0, 0.0])
    vals = marg.density(marg.density.knots)
    ratio = vals / w
    assert np.ptp(ratio) / np.mean(ratio) < 1e-10


def test_sample_marginal_mass_and_advisory_class(rng):
    cloud = uniform_simplex(2, 200_000, rng)
    marg = marginal_1d(cloud, [1.0, 0.0], s=0.5)
    assert marg.density.mass == pytest.approx(1.0, abs=1e-9)
    assert marg.method == "histogram-fd"
    # the projected triangle density is (1-x)-shaped; check rough agreement
    mid = marg.density(np.array([0.25]))[0]
    assert mid == pytest.approx(1.5, abs=0.2)


def test_gaussian_marginal_is_log_concave_within_noise(rng):
    cloud = gaussian([0.0, 0.0], np.eye(2), 400_000, rng)
    marg = marginal_1d(cloud, [0.6, 0.8], s=0.0)
    assert marg.expected_class == ConcavityClass.log_concave()
    rep = check_class(marg.density, marg.expected_class, tol=0.5)
    assert rep.passed  # advisory-level tolerance: binning noise is not a failure


def test_marginal_consistency_with_1d_verification(rng):
    # the 1-d shadow: grid-path marginals of the uniform triangle pass the
    # halfspace-mass bound with the projected class
    gd = polygon_grid_density(TRIANGLE, np.linspace(0, 1, 257), np.linspace(0, 1, 257))
    for v in ([1.0, 0.0], [0.0, 1.0]):
        marg = marginal_1d(gd, v, s=0.5)
        d = recenter(normalize(marg.density))
        rep = verify_grunbaum_1d(d, marg.expected_class, tol=1e-6, center_tol=1e-6)
        assert rep.passed, rep


# -- minkowski ----------------------------------------------------------------


def test_minkowski_lebesgue_square(rng):
    gd = GridDensityND((np.linspace(0, 1, 65), np.linspace(0, 1, 65)), np.ones((64, 64)))
    rep = minkowski_test(gd, 0.5, trials=60, rng=rng)
    assert rep.passed
    assert rep.worst_margin >= -1e-9


def test_minkowski_equal_boxes_equality(rng):
    gd = GridDensityND((np.linspace(0, 1, 33), np.linspace(0, 1, 33)), np.ones((32, 32)))
    lo, hi = np.array([0.2, 0.2]), np.array([0.7, 0.8])
    m = gd.box_mass(lo, hi)
    from grunbaum import s_mean

    assert s_mean(m, m, 0.3, 0.5) == pytest.approx(m, abs=1e-14)


def test_minkowski_gaussian_grid(rng):
    xs = np.linspace(-4, 4, 97)
    cx = 0.5 * (xs[:-1] + xs[1:])
    vals = np.exp(-0.5 * (cx[:, None] ** 2 + cx[None, :] ** 2))
    gd = GridDensityND((xs, xs), vals).normalized()
    rep = minkowski_test(gd, 0.0, trials=60, rng=rng)
    assert rep.passed
