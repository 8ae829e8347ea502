"""CDF profiles, the integral identity, and envelope dominance."""

import math

import numpy as np
import pytest

from grunbaum import (
    ConcavityClass,
    cdf_profile,
    check_class,
    check_envelope,
    cone_density,
    exp_density,
    intR_identity,
    neg_cone_density,
    normalize,
    profile_shape_defect,
    random_class_density,
    recenter,
    uniform_density,
)
from grunbaum.verify1d import rigidity_detect

P2 = ConcavityClass.positive(2.0)
LC = ConcavityClass.log_concave()
N3 = ConcavityClass.negative(-3.0)


def test_uniform_profile_values():
    p = cdf_profile(normalize(uniform_density(-1, 1)))
    assert p.r0 == pytest.approx(0.5, abs=1e-13)
    assert p.c == pytest.approx(1.0, abs=1e-12)
    assert p.w0 == pytest.approx(0.5)
    assert p.second_moment == pytest.approx(1 / 3, abs=1e-12)
    # R(x) = (x+1)/2 on the grid
    assert p.values == pytest.approx((p.grid + 1) / 2, abs=1e-12)


def test_cone_profile_closed_form():
    p = cdf_profile(cone_density(2, 1))
    assert p.r0 == pytest.approx(4 / 9, abs=1e-13)
    expected = (4 / 9) * (1 + p.grid / 2) ** 2
    assert p.values == pytest.approx(expected, abs=1e-12)


def test_exponential_profile():
    p = cdf_profile(exp_density(1.0))
    assert p.r0 == pytest.approx(math.exp(-1), abs=1e-13)
    assert p.c == pytest.approx(1.0, abs=1e-12)
    inside = p.grid <= 1.0
    assert p.values[inside] == pytest.approx(np.exp(p.grid[inside] - 1.0), abs=1e-10)


def test_profile_requires_normalized_density():
    with pytest.raises(ValueError):
        cdf_profile(uniform_density(-1, 1))


def test_profile_flags_boundary_barycenter():
    d = normalize(uniform_density(0.5, 1.5))  # support entirely right of 0
    p = cdf_profile(d)
    assert p.c is None


def test_second_moment_divergence_flag():
    p = cdf_profile(neg_cone_density(-1.5, 1.0))
    assert math.isinf(p.second_moment)


def test_intR_identity_on_models():
    for d in (normalize(uniform_density(-1, 1)), cone_density(2, 1), cone_density(1.5, 0.5)):
        ok, residual = intR_identity(cdf_profile(d))
        assert ok and residual < 1e-8


def test_intR_identity_value_is_upper_endpoint():
    # for the uniform on [-1, 1]: int (x+1)/2 dx = 1 = b
    from grunbaum.quadrature import adaptive_simpson

    val = adaptive_simpson(lambda x: (np.asarray(x) + 1) / 2, -1, 1)
    assert val == pytest.approx(1.0, abs=1e-13)


def test_intR_identity_rejects_unbounded_or_uncentered():
    with pytest.raises(ValueError):
        intR_identity(cdf_profile(exp_density(1.0)))
    shifted = cone_density(2, 1).translated(0.3)
    with pytest.raises(ValueError):
        intR_identity(cdf_profile(shifted))


def test_intR_identity_on_random_recentered_tabulated(rng):
    for _ in range(5):
        d = random_class_density(ConcavityClass.positive(2.0), rng)
        ok, residual = intR_identity(cdf_profile(d))
        assert ok, residual


def test_envelope_uniform_difference_is_quadratic():
    # U - R = x^2/8 for the uniform on [-1, 1] with N=2, c=1
    p = cdf_profile(normalize(uniform_density(-1, 1)))
    rep = check_envelope(p, P2)
    assert rep.passed
    assert rep.sup_deviation == pytest.approx(1 / 8, abs=1e-10)


def test_envelope_equality_for_models():
    assert check_envelope(cdf_profile(cone_density(2, 1)), P2).sup_deviation < 1e-12
    assert check_envelope(cdf_profile(exp_density(1)), LC).sup_deviation < 1e-10
    assert check_envelope(cdf_profile(neg_cone_density(-3, 1)), N3).sup_deviation < 1e-10


def test_envelope_dominance_on_random_densities(rng):
    for cls in (P2, ConcavityClass.positive(1.5), LC, N3):
        for _ in range(8):
            d = random_class_density(cls, rng)
            rep = check_envelope(cdf_profile(d), cls)
            assert rep.passed, (cls.describe(), rep.worst_violation)


def test_envelope_equality_iff_extremal(rng):
    # equality case fires rigidity; a generic density does not
    p_model = cdf_profile(cone_density(2, 1))
    assert check_envelope(p_model, P2).sup_deviation < 1e-10
    assert rigidity_detect(p_model, P2).extremal
    d = random_class_density(P2, rng)
    p = cdf_profile(d)
    res = rigidity_detect(p, P2)
    if not res.extremal:
        assert check_envelope(p, P2).sup_deviation > 1e-6


def test_profile_shape_transfer(rng):
    # R^(1/N) concave for positive, convex for negative, log R concave for LC
    for cls in (P2, ConcavityClass.positive(1.5), N3, LC):
        for _ in range(5):
            d = random_class_density(cls, rng)
            assert profile_shape_defect(cdf_profile(d), cls) <= 1e-8


def test_class_check_and_profile_agree_on_models():
    for d, cls in ((cone_density(3, 1), ConcavityClass.positive(3.0)), (exp_density(2), LC)):
        assert check_class(d, cls).passed
        assert profile_shape_defect(cdf_profile(d), cls) <= 1e-9
