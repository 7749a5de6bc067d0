import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geomcmp import FocalPointInRange, QuadratureUnresolved
from geomcmp.jacobi import (
    Profile,
    hopf_profile,
    index_form,
    model_field,
    pair_index_form,
    pair_profile,
    random_admissible_field,
    sn_profile,
    verify_basic_inequality,
)
from geomcmp.modelfn import ct, period


def test_linear_profile_far_boundary():
    p = Profile(lambda s: s, np.ones_like)
    res = index_form(p, 0.0, 1.0, 1.0, boundary="end")
    assert res.value == pytest.approx(0.0, abs=1e-12)
    assert res.field_kind == "custom"


def test_hopf_profile_flat():
    res = index_form(hopf_profile(0.0, 1.0, 0.5), 0.0, ct(0.0, 1.0), 0.5)
    assert res.value == pytest.approx(-2.0, abs=1e-10)
    assert res.field_kind == "f-profile"


def test_pair_profile_flat():
    res = pair_index_form(pair_profile(0.0, 1.0, 0.5), [0.0, 0.0], [1.0, 1.0], 0.5)
    assert res.value == pytest.approx(-4.0, abs=1e-10)
    assert res.field_kind == "g-profile"


def test_from_samples_profile():
    s = np.linspace(0.0, 1.0, 201)
    res = index_form(Profile.from_samples(s, s), 0.0, 1.0, 1.0, boundary="end")
    assert res.value == pytest.approx(0.0, abs=1e-10)


def test_unresolved_quadrature():
    p = Profile(lambda s: np.sqrt(np.abs(s - 0.3)), lambda s: 0.5 / np.sqrt(np.abs(s - 0.3) + 1e-300))
    with pytest.raises(QuadratureUnresolved):
        index_form(p, 0.0, 0.0, 1.0)


ks = st.sampled_from([-1.0, -0.3, 0.0, 0.5, 1.0])


@settings(max_examples=40, deadline=None)
@given(ks, st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_hopf_index_equals_model_curvature(k, fh, fl):
    h = fh * min(period(4 * k), 3.0)
    ell = fl * h
    res = index_form(hopf_profile(k, h, ell), 4 * k, ct(4 * k, h), ell)
    assert res.value == pytest.approx(-ct(4 * k, h - ell), abs=1e-8 * max(1.0, ct(4 * k, h - ell)))


@settings(max_examples=40, deadline=None)
@given(ks, st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_pair_index_equals_model_curvature(k, fh, fl):
    h = fh * min(period(k), 3.0)
    ell = fl * h
    res = pair_index_form(pair_profile(k, h, ell), [k, k], [ct(k, h)] * 2, ell)
    assert res.value == pytest.approx(-2 * ct(k, h - ell), abs=1e-8 * max(1.0, ct(k, h - ell)))


@settings(max_examples=40, deadline=None)
@given(ks, st.floats(0.05, 0.9))
def test_sn_profile_boundary_term_vanishes(k, fl):
    ell = fl * min(period(k), 3.0)
    res = index_form(sn_profile(k, ell), k, 123.0, ell)
    assert res.value == pytest.approx(ct(k, ell), rel=1e-8)


def test_basic_inequality_report():
    field = random_admissible_field(3, 0.0, seed=4, roughness=0.2)
    report = verify_basic_inequality(field, 0.2 * np.eye(3), 0.8, trials=200, seed=1)
    assert report.passed
    assert len(report.rows) == 200
    assert report.notes["equality_gap"] == 0.0
    assert report.notes["min_gap_perturbed"] > 1e-10
    assert report.notes["closed_form_error"] < 1e-8


def test_basic_inequality_focal_in_range():
    with pytest.raises(FocalPointInRange):
        verify_basic_inequality(model_field(2, 0.0), 2.0 * np.eye(2), 0.8, trials=3)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 4), st.sampled_from([-1.0, 0.0, 1.0]))
def test_basic_inequality_random(seed, m, k):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((m, m))
    S = 0.3 * (X + X.T)
    field = random_admissible_field(m, k, seed=seed)
    try:
        report = verify_basic_inequality(field, S, 0.5, trials=20, seed=seed)
    except FocalPointInRange:
        return
    assert report.passed
    assert report.notes["min_gap_perturbed"] > 0
