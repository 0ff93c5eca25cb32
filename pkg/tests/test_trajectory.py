import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.interpolate import BPoly

from flatneuro import trajectory as tr
from flatneuro.errors import ConfigurationError


def fd(f, t, h=1e-5):
    return (f(t + h) - f(t - h)) / (2 * h)


@pytest.mark.parametrize("ref", [
    tr.constant(0.3),
    tr.line(1.0, -0.2),
    tr.tanh_step(0.1, 0.9, 3.0, 1.0),
    tr.tanh_of_line(0.63, 0.0, 0.38, -0.03, 9.0, 0.31, 10.0),
    tr.sinusoid_sum(0.5, [0.1, 0.05], [1.0, 3.0], [0.2, 1.0]),
])
def test_derivatives_match_finite_differences(ref):
    t = np.linspace(0.0, 8.0, 17)
    d = ref.derivs(t, 3)
    for k in range(3):
        np.testing.assert_allclose(d[k + 1], fd(lambda s: ref.derivs(s, 3)[k], t),
                                   rtol=1e-6, atol=1e-7)


def test_tanh_of_line_closed_form():
    ref = tr.tanh_of_line(1.0, 0.0, 2.0, -1.0, 4.0, 0.5, 10.0)
    t = np.array([0.0, 5.0, 10.0])
    x = 1.0 - t / 10.0
    np.testing.assert_allclose(ref(t), 2.0 - 1.5 * (1 + np.tanh(4 * (x - 0.5))))


def test_sinusoid_sum_high_derivatives_are_exact():
    ref = tr.sinusoid_sum(0.0, [1.0], [2.0])
    t = 0.7
    d = ref.derivs(t, 8)
    expect = [2.0 ** k * math.sin(2 * t + k * math.pi / 2) for k in range(9)]
    np.testing.assert_allclose(d, expect, rtol=1e-13)


def test_rejects_bad_parameters_and_orders():
    with pytest.raises(ConfigurationError):
        tr.RefTrajectory(tr.Family.LINE, {"v0": 1.0})
    with pytest.raises(ConfigurationError):
        tr.line(0.0, 1.0, max_order=2).derivs(0.0, 3)
    with pytest.raises(ConfigurationError):
        tr.tanh_of_line(0, 1, 0, 1, 1, 0, T=0.0)
    with pytest.raises(ConfigurationError):
        tr.line(0, 1).rescaled(2.0)


def test_random_sinusoid_sum_is_bounded_and_periodic(rng):
    ref = tr.random_sinusoid_sum(rng, 0.5, 0.2, n_terms=4, period=3.0)
    t = np.linspace(0, 9, 9001)
    v = ref(t)
    assert np.all(np.abs(v - 0.5) <= 0.2 + 1e-12)
    assert tr.check_cyclic(t, v, 3.0, 1e-12)


def test_rescaled_keeps_shape(rng):
    ref = tr.random_sinusoid_sum(rng, 0.0, 1.0)
    half = ref.rescaled(0.5, offset=2.0)
    t = np.linspace(0, 6, 13)
    np.testing.assert_allclose(half(t), 2.0 + 0.5 * ref(t))


def test_cyclic_defect_detects_aperiodic_signal():
    t = np.linspace(0, 20, 4001)
    assert not tr.check_cyclic(t, np.sin(t) + 0.01 * t, 2 * math.pi, 1e-3)
    assert tr.check_cyclic(t, np.sin(t), 2 * math.pi, 1e-3)  # interpolated path
    with pytest.raises(ConfigurationError):
        tr.cyclic_defect(t, np.sin(t), 12.0)


# -- Bernstein splines -------------------------------------------------------

def test_bernstein_product_matches_pointwise(rng):
    a = tr.random_spline(rng, 4, 3)
    b = tr.PolySpline(a.knots, rng.standard_normal((3, a.coeffs.shape[1])))
    t = np.linspace(a.knots[0], a.knots[-1] - 1e-12, 200)
    np.testing.assert_allclose((a * b)(t), a(t) * b(t), atol=1e-12)
    np.testing.assert_allclose((a ** 2)(t), a(t) ** 2, atol=1e-12)
    np.testing.assert_allclose((a - b + 1.5)(t), a(t) - b(t) + 1.5, atol=1e-12)


def test_elevation_preserves_values(rng):
    s = tr.random_spline(rng, 5, 3)
    t = np.linspace(0, 1 - 1e-12, 101)
    np.testing.assert_allclose(s.elevate(3)(t), s(t), atol=1e-12)


def test_random_spline_matches_bspline_oracle(rng):
    from scipy.interpolate import BSpline

    state = rng.bit_generator.state
    s = tr.random_spline(rng, 6, 3)
    rng.bit_generator.state = state
    knots = np.concatenate([[0.0] * 3, np.linspace(0, 1, 7), [1.0] * 3])
    coef = rng.standard_normal(len(knots) - 4)
    t = np.linspace(0, 1 - 1e-12, 77)
    np.testing.assert_allclose(s(t), BSpline(knots, coef, 3)(t), atol=1e-12)


@given(st.integers(0, 2 ** 32 - 1), st.integers(0, 3))
def test_hull_bound_never_exceeds_true_minimum(seed, elevate):
    s = tr.random_spline(np.random.default_rng(seed), 5, 3, offset=0.5)
    t = np.linspace(s.knots[0], s.knots[-1], 2001)
    assert tr.spline_lower_bound(s, elevate) <= np.min(s(t)) + 1e-12


def test_elevation_tightens_bound(rng):
    s = tr.random_spline(rng, 4, 3)
    bounds = [tr.spline_lower_bound(s, k) for k in range(5)]
    assert all(b2 >= b1 - 1e-14 for b1, b2 in zip(bounds, bounds[1:]))


def test_certify_positive():
    s = tr.PolySpline([0.0, 1.0], [[1.0], [-0.2], [1.0]])
    assert np.min(s(np.linspace(0, 1, 101))) > 0  # 1 - 2.4 t + 2.4 t^2 > 0
    assert not tr.certify_positive(s)
    assert tr.certify_positive(s, elevate=8)


def test_spline_as_reference():
    s = tr.PolySpline([0.0, 1.0, 2.0], np.array([[0.0, 1.0], [1.0, 1.5], [1.0, 2.0]]))
    ref = tr.RefTrajectory(tr.Family.POLY_SPLINE, {"spline": s})
    t = np.array([0.25, 1.5])
    np.testing.assert_allclose(ref.derivs(t, 2), [s(t), s(t, 1), s(t, 2)])
    assert isinstance(s.bpoly, BPoly)


def test_fit_amplitude_bisects_feasibility():
    amp = tr.fit_amplitude(lambda a: a, lambda a: a <= 0.3, 1.0)
    assert amp == pytest.approx(0.3, abs=1e-9)
    assert tr.fit_amplitude(lambda a: a, lambda a: True, 1.0) == 1.0
    with pytest.raises(ConfigurationError):
        tr.fit_amplitude(lambda a: a, lambda a: False, 1.0)
