"""One-dimensional mass-bound verification and extremal detection."""

import math

import numpy as np
import pytest

from grunbaum import (
    ConcavityClass,
    PreconditionError,
    cdf_profile,
    cone_density,
    exp_density,
    grunbaum_bound,
    neg_cone_density,
    normalize,
    random_class_density,
    rigidity_detect,
    uniform_density,
    verify_grunbaum_1d,
)

P2 = ConcavityClass.positive(2.0)
LC = ConcavityClass.log_concave()


def test_bound_values():
    assert grunbaum_bound(P2) == pytest.approx(4 / 9)
    assert grunbaum_bound(LC) == pytest.approx(math.exp(-1))
    assert grunbaum_bound(ConcavityClass.negative(-2.0)) == pytest.approx(0.25)
    assert grunbaum_bound(ConcavityClass.negative(-3.0)) == pytest.approx(8 / 27)
    assert grunbaum_bound(ConcavityClass.s_concave(0.5, 2)) == pytest.approx(4 / 9)
    assert grunbaum_bound(ConcavityClass.s_concave(0.0, 5)) == pytest.approx(math.exp(-1))


def test_bound_chain_monotone_in_n():
    ns = np.linspace(1.01, 60.0, 200)
    vals = [(n / (n + 1)) ** n for n in ns]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] > math.exp(-1)
    assert vals[-1] == pytest.approx(math.exp(-1), abs=1e-2)
    betas = np.linspace(-50.0, -1.05, 200)
    for b in betas:
        assert (b / (b + 1)) ** b <= math.exp(-1) + 1e-12


def test_uniform_passes_with_symmetric_margin():
    rep = verify_grunbaum_1d(normalize(uniform_density(-1, 1)), P2)
    assert rep.passed
    assert rep.left_mass == pytest.approx(0.5, abs=1e-12)
    assert rep.margin_left == pytest.approx(0.5 - 4 / 9, abs=1e-12)


def test_cone_achieves_equality():
    rep = verify_grunbaum_1d(cone_density(2, 1), P2)
    assert rep.passed
    assert rep.left_mass == pytest.approx(4 / 9, abs=1e-12)
    assert rep.margin_left == pytest.approx(0.0, abs=1e-12)


def test_exponential_achieves_equality():
    rep = verify_grunbaum_1d(exp_density(1.0), LC)
    assert rep.left_mass == pytest.approx(math.exp(-1), abs=1e-12)
    assert rep.passed


def test_neg_cone_achieves_equality():
    cls = ConcavityClass.negative(-3.0)
    rep = verify_grunbaum_1d(neg_cone_density(-3.0, 1.0), cls)
    assert rep.left_mass == pytest.approx(8 / 27, abs=1e-12)
    assert rep.passed


def test_uncentered_input_rejected():
    with pytest.raises(PreconditionError):
        verify_grunbaum_1d(cone_density(2, 1).translated(0.5), P2)


def test_boundary_barycenter_rejected():
    d = normalize(uniform_density(0.0, 1.0)).translated(-0.5)  # centered, fine
    verify_grunbaum_1d(d, P2)
    off = normalize(uniform_density(1.0, 2.0))  # support right of 0, uncentered
    with pytest.raises(PreconditionError):
        verify_grunbaum_1d(off, P2)


def test_unnormalized_input_rejected():
    with pytest.raises(PreconditionError):
        verify_grunbaum_1d(uniform_density(-1, 1), P2)


def test_class_failure_reported_not_raised():
    xs = np.linspace(-1, 1, 9)
    from grunbaum import plpow_density, recenter

    d = recenter(normalize(plpow_density(xs, 1.0 + xs**2, 1.0)))  # convex w
    rep = verify_grunbaum_1d(d, P2, center_tol=1e-9)
    assert not rep.passed
    assert not rep.class_report.passed


# -- rigidity -----------------------------------------------------------------


@pytest.mark.parametrize("c", [0.5, 1.0, 3.0])
def test_rigidity_recovers_scale(c):
    res = rigidity_detect(cdf_profile(cone_density(2.0, c)), P2)
    assert res.extremal
    assert res.model.c == pytest.approx(c, abs=1e-9)
    assert res.orientation == "left-apex"


def test_rigidity_rejects_uniform():
    res = rigidity_detect(cdf_profile(normalize(uniform_density(-1, 1))), P2)
    assert not res.extremal
    # R(0) = 1/2 vs bound 4/9 already separates it
    assert res.sup_distance > 1e-3 or res.bound_gap > 1e-3


def test_rigidity_exponential():
    res = rigidity_detect(cdf_profile(exp_density(2.0)), LC)
    assert res.extremal and res.model.c == pytest.approx(2.0, abs=1e-9)


def test_rigidity_right_apex_family():
    res = rigidity_detect(cdf_profile(cone_density(2.0, 1.0, "right-apex")), P2)
    assert res.extremal
    assert res.orientation == "right-apex"
    assert res.model.c == pytest.approx(1.0, abs=1e-9)


# -- invariances ---------------------------------------------------------------


def test_reflection_swaps_one_sided_masses(rng):
    d = random_class_density(P2, rng)
    rep = verify_grunbaum_1d(d, P2)
    rep_r = verify_grunbaum_1d(d.reflected(), P2)
    assert rep_r.left_mass == pytest.approx(rep.right_mass, abs=1e-12)
    assert rep_r.right_mass == pytest.approx(rep.left_mass, abs=1e-12)


@pytest.mark.parametrize("t", [0.5, 2.0, 7.5])
def test_dilation_invariance_and_c_scaling(t, rng):
    d = random_class_density(P2, rng)
    rep = verify_grunbaum_1d(d, P2)
    dd = d.dilated(t)
    rep_t = verify_grunbaum_1d(dd, P2)
    assert rep_t.passed == rep.passed
    assert rep_t.left_mass == pytest.approx(rep.left_mass, abs=1e-11)
    c = cdf_profile(d).c
    ct = cdf_profile(dd).c
    assert ct == pytest.approx(c / t, rel=1e-9)


def test_random_suite_all_classes(rng):
    classes = [
        ConcavityClass.positive(1.5),
        ConcavityClass.positive(4.0),
        LC,
        ConcavityClass.negative(-5.0),
    ]
    for cls in classes:
        for _ in range(15):
            d = random_class_density(cls, rng)
            rep = verify_grunbaum_1d(d, cls, tol=1e-8)
            assert rep.passed
            assert rep.margin >= -1e-8
