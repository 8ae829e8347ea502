"""Generalized-mean case split and its order/scaling properties."""

import math

import pytest
from hypothesis import given, strategies as st

from grunbaum import s_mean

finite_s = st.floats(min_value=-20, max_value=20, allow_nan=False)
pos = st.floats(min_value=1e-6, max_value=1e6, allow_nan=False, allow_infinity=False)
lam_st = st.floats(min_value=0.01, max_value=0.99)


def test_identical_arguments_any_s():
    assert s_mean(4.0, 4.0, 0.3, 7.2) == pytest.approx(4.0)


def test_negative_s_with_a_zero_factor():
    # the degenerate branch: a zero argument kills every negative-s mean
    assert s_mean(1.0, 0.0, 0.5, -2.0) == 0.0
    assert s_mean(0.0, 3.0, 0.9, -0.5) == 0.0


def test_geometric_mean_at_zero():
    assert s_mean(1.0, 4.0, 0.5, 0.0) == pytest.approx(2.0)


def test_min_max_at_infinities():
    assert s_mean(2.0, 5.0, 0.4, math.inf) == 5.0
    assert s_mean(2.0, 5.0, 0.4, -math.inf) == 2.0


def test_arithmetic_mean_at_one():
    assert s_mean(1.0, 3.0, 0.25, 1.0) == pytest.approx(0.75 * 1 + 0.25 * 3)


def test_rejects_bad_inputs():
    with pytest.raises(ValueError):
        s_mean(-1.0, 2.0, 0.5, 1.0)
    with pytest.raises(ValueError):
        s_mean(1.0, 2.0, 1.5, 1.0)


@given(a=pos, b=pos, lam=lam_st, s1=finite_s, s2=finite_s)
def test_monotone_in_s(a, b, lam, s1, s2):
    # 1e-9 relative slack: near s = 0 the outer 1/s power costs ~eps/|s|
    lo, hi = sorted((s1, s2))
    assert s_mean(a, b, lam, lo) <= s_mean(a, b, lam, hi) * (1 + 1e-9) + 1e-12


@given(a=pos, b=pos, lam=lam_st, s=finite_s)
def test_between_min_and_max(a, b, lam, s):
    m = s_mean(a, b, lam, s)
    assert min(a, b) * (1 - 1e-9) <= m <= max(a, b) * (1 + 1e-9)


@given(a=pos, b=pos, lam=lam_st, s=finite_s, t=st.floats(min_value=1e-3, max_value=1e3))
def test_positive_homogeneity(a, b, lam, s, t):
    assert s_mean(t * a, t * b, lam, s) == pytest.approx(t * s_mean(a, b, lam, s), rel=1e-9)
