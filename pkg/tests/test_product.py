"""Split product densities, pushforwards, and needle decompositions."""

import math

import numpy as np
import pytest

from grunbaum import (
    ConcavityClass,
    FiberSpace,
    Needle,
    NeedleDecomposition,
    PreconditionError,
    ProductDensity,
    barycenter_busemann,
    busemann_mass,
    check_pushforward_class,
    cone_density,
    cylinder_fixture,
    exp_density,
    needle_verify,
    normalize,
    pushforward_busemann,
    recenter_product,
    rigidity_profile_check,
    separable_needles,
    separable_product,
    tabulated_density,
    verify_main_theorem,
)

P2 = ConcavityClass.positive(2.0)


@pytest.fixture
def cone_fixture(rng):
    fiber = FiberSpace(rng.uniform(0.5, 2.0, 64))
    g = rng.uniform(0.5, 2.0, 64)
    t = np.linspace(-2.0, 1.0, 2049)
    return separable_product(cone_density(2.0, 1.0), t, fiber, g)


def test_fiber_space_validation():
    with pytest.raises(ValueError):
        FiberSpace(np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        FiberSpace(np.array([1.0, 1.0]), metric=np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(ValueError):
        # triangle inequality violated: d(0,2) > d(0,1) + d(1,2)
        FiberSpace(
            np.ones(3),
            metric=np.array([[0, 1, 9], [1, 0, 1], [9, 1, 0]], dtype=float),
        )
    FiberSpace(np.ones(3), metric=np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]], dtype=float))


def test_pushforward_of_separable_recovers_profile(cone_fixture):
    w = pushforward_busemann(cone_fixture)
    xs = np.linspace(-2, 1, 9)
    assert w(xs) == pytest.approx(cone_density(2.0, 1.0)(xs), abs=1e-12)
    assert w.mass == pytest.approx(1.0, abs=1e-12)


def test_pushforward_uniform_two_fibers():
    fiber = FiberSpace(np.array([1.0, 1.0]))
    t = np.linspace(-1, 1, 33)
    pd = ProductDensity(t, fiber, np.full((33, 2), 0.25))
    w = pushforward_busemann(pd)
    assert w(np.array([0.0]))[0] == pytest.approx(0.5)


def test_busemann_masses(cone_fixture):
    assert busemann_mass(cone_fixture, 0.0, "le") == pytest.approx(4 / 9, abs=1e-12)
    assert busemann_mass(cone_fixture, math.inf, "le") == pytest.approx(1.0, abs=1e-12)
    assert busemann_mass(cone_fixture, 0.0, "ge") == pytest.approx(5 / 9, abs=1e-12)
    with pytest.raises(ValueError):
        busemann_mass(cone_fixture, 0.0, "between")


def test_fubini_consistency(cone_fixture):
    # slab masses match the pushforward CDF at every grid point tested
    w = pushforward_busemann(cone_fixture)
    for r in np.linspace(-2, 1, 17):
        assert busemann_mass(cone_fixture, r, "le") == pytest.approx(
            w.integrate(w.support.lower, r), abs=1e-10
        )


def test_zero_mean_and_translation_covariance(cone_fixture):
    assert barycenter_busemann(cone_fixture, verify=True, tol=1e-10) == pytest.approx(
        0.0, abs=1e-10
    )
    shifted = ProductDensity(
        cone_fixture.t_grid + 0.7, cone_fixture.fiber, cone_fixture.values, cone_fixture.cls
    )
    assert barycenter_busemann(shifted) == pytest.approx(0.7, abs=1e-10)
    assert busemann_mass(shifted, 0.7, "le") == pytest.approx(4 / 9, abs=1e-12)
    back = recenter_product(shifted)
    assert barycenter_busemann(back) == pytest.approx(0.0, abs=1e-10)


def test_pushforward_class_check(cone_fixture):
    rep = check_pushforward_class(cone_fixture)
    assert rep.passed and not rep.fiber_failures


def test_adversarial_fiber_flagged(cone_fixture):
    vals = cone_fixture.values.copy()
    vals[:, 5] = vals[::-1, 5] ** 2  # convex bump on one fiber
    bad = ProductDensity(cone_fixture.t_grid, cone_fixture.fiber, vals, P2).normalized()
    rep = check_pushforward_class(bad)
    assert rep.fiber_failures
    assert not rep.passed


def test_verify_main_theorem_cone_equality(cone_fixture):
    rep = verify_main_theorem(cone_fixture)
    assert rep.passed
    assert rep.left_mass == pytest.approx(4 / 9, abs=1e-10)
    assert rep.margin_left == pytest.approx(0.0, abs=1e-10)


def test_cylinder_fixture():
    cyl = cylinder_fixture()
    assert cyl.mass == pytest.approx(1.0, abs=1e-12)
    assert busemann_mass(cyl, 0.0, "le") == pytest.approx(0.5, abs=1e-12)
    assert busemann_mass(cyl, 0.0, "ge") == pytest.approx(0.5, abs=1e-12)
    assert barycenter_busemann(cyl) == pytest.approx(0.0, abs=1e-12)
    rep = verify_main_theorem(cyl.normalized())
    assert rep.passed and rep.bound == pytest.approx(4 / 9)


# -- needles --------------------------------------------------------------------


def test_separable_needles_structure(cone_fixture):
    D = separable_needles(cone_fixture)
    assert len(D.needles) == 64
    assert sum(n.weight for n in D.needles) == pytest.approx(1.0, abs=1e-10)
    # each needle carries the shared profile
    xs = np.linspace(-2, 1, 7)
    for n in D.needles[:5]:
        assert n.density(xs) == pytest.approx(cone_density(2.0, 1.0)(xs), abs=1e-10)


def test_cylinder_needles_equal_weights():
    D = separable_needles(cylinder_fixture().normalized())
    weights = [n.weight for n in D.needles]
    assert np.ptp(weights) < 1e-12
    assert len(weights) == 64


def test_nonseparable_rejected(cone_fixture):
    vals = cone_fixture.values.copy()
    vals[100, 3] *= 2.0
    bad = ProductDensity(cone_fixture.t_grid, cone_fixture.fiber, vals, P2).normalized()
    with pytest.raises(ValueError, match="not separable"):
        separable_needles(bad)


def test_needle_verify_all_checks_pass(cone_fixture, rng):
    D = separable_needles(cone_fixture)
    rep = needle_verify(D, cone_fixture, P2, tol=1e-8, rng=rng)
    assert rep.passed
    assert rep.slab_residual < 1e-8
    assert rep.aggregation_residual < 1e-8
    assert rep.global_left == pytest.approx(4 / 9, abs=1e-8)
    assert all(r["zero_mean"] and r["class_ok"] and r["bound_ok"] for r in rep.per_needle)


def test_needle_verify_detects_miscentered_needle(cone_fixture, rng):
    D = separable_needles(cone_fixture)
    needles = list(D.needles)
    shifted = needles[7].density.translated(0.05)
    needles[7] = Needle(needles[7].weight, shifted, needles[7].label)
    bad = NeedleDecomposition(tuple(needles))
    rep = needle_verify(bad, cone_fixture, P2, tol=1e-8, rng=rng)
    assert not rep.passed
    bad_rows = [r["needle"] for r in rep.per_needle if not r["zero_mean"]]
    assert bad_rows == [7]


def test_weights_must_sum_to_one(cone_fixture):
    D = separable_needles(cone_fixture)
    needles = list(D.needles)
    needles[0] = Needle(needles[0].weight * 2.0, needles[0].density, needles[0].label)
    with pytest.raises(ValueError):
        NeedleDecomposition(tuple(needles))


def test_rigidity_profile_all_cone(cone_fixture):
    D = separable_needles(cone_fixture)
    rep = rigidity_profile_check(D, P2, tol=1e-8, product=cone_fixture)
    assert rep.passed
    assert rep.common_c == pytest.approx(1.0, abs=1e-9)
    # level-set mass profile (2c/3)((2+ct)/3) with c=1 on the grid
    t = cone_fixture.t_grid
    prof = cone_fixture.values @ cone_fixture.fiber.weights
    assert prof == pytest.approx((2 / 3) * ((2 + t) / 3), abs=1e-8)


def test_rigidity_profile_mixed_scales_fails():
    fiber = FiberSpace(np.ones(2))
    t = np.linspace(-4, 0.9, 4097)
    d1 = cone_density(2.0, 1.0)
    d2 = cone_density(2.0, 2.0)
    needles = (
        Needle(0.5, tabulated_density(t, d1(t) / np.trapezoid(d1(t), t) * 1.0), 0),
        Needle(0.5, tabulated_density(t, d2(t) / np.trapezoid(d2(t), t) * 1.0), 1),
    )
    # normalize each needle exactly
    needles = tuple(Needle(n.weight, normalize(n.density), n.label) for n in needles)
    D = NeedleDecomposition(needles)
    rep = rigidity_profile_check(D, P2, tol=1e-6)
    assert not rep.passed
    cs = [c for c in rep.c_values if c is not None]
    assert len(cs) == 2 and abs(cs[0] - cs[1]) > 0.5


def test_rigidity_profile_exponential_needles(rng):
    fiber = FiberSpace(rng.uniform(0.5, 2.0, 8))
    g = rng.uniform(0.5, 2.0, 8)
    t = np.linspace(-40.0, 1.0, 16385)
    pd = separable_product(exp_density(1.0), t, fiber, g)
    D = separable_needles(pd)
    rep = rigidity_profile_check(D, ConcavityClass.log_concave(), tol=2e-4, product=pd)
    assert rep.passed
    assert rep.common_c == pytest.approx(1.0, abs=1e-4)


def test_needle_requires_normalized_density():
    with pytest.raises(ValueError):
        Needle(1.0, cone_density(2.0, 1.0).dilated(1.0).translated(0.0).reflected().dilated(2.0))


def test_degenerate_needle_rejected():
    d = normalize(tabulated_density([0.0, 1e-13], [1.0, 1.0]))
    with pytest.raises(ValueError):
        NeedleDecomposition((Needle(1.0, d),))
