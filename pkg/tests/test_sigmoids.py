import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flatneuro import sigmoids as sg
from flatneuro.errors import ConfigurationError, DomainError, UnsupportedOperation
from flatneuro.jets import Jet

ALL = list(sg.Family)
SMOOTH = [f for f in sg.Family if f not in (sg.Family.HEAVISIDE, sg.Family.PIECEWISE_LINEAR)]


def interior_points(spec, n=9):
    lo, hi = sg.value_range(spec)
    hi = min(hi, lo + 4.0)
    return np.linspace(lo, hi, n + 2)[1:-1]


def sample_inputs(spec):
    if spec.family in (sg.Family.SQUARE_ROOT, sg.Family.NAKA_RUSHTON):
        return np.linspace(0.2, 3.0, 9)
    return np.linspace(-3.0, 3.0, 9)


@pytest.mark.parametrize("family", ALL)
def test_spec_round_trips_through_dict(family):
    spec = sg.SigmoidSpec(family)
    assert sg.SigmoidSpec.from_dict(spec.to_dict()) == spec


def test_unknown_parameter_and_nonpositive_scale_rejected():
    with pytest.raises(ConfigurationError):
        sg.SigmoidSpec(sg.Family.LOGISTIC, {"gain": 1.0})
    with pytest.raises(ConfigurationError):
        sg.logistic(beta=0.0)
    with pytest.raises(ConfigurationError):
        sg.SigmoidSpec("Sigmoidal")


@pytest.mark.parametrize("family", SMOOTH)
def test_derivative_matches_finite_difference(family):
    spec = sg.SigmoidSpec(family)
    x = sample_inputs(spec)
    h = 1e-6
    fd = (sg.evaluate(spec, x + h) - sg.evaluate(spec, x - h)) / (2 * h)
    np.testing.assert_allclose(sg.deriv(spec, x), fd, rtol=1e-6, atol=1e-8)


@pytest.mark.parametrize("family", SMOOTH)
def test_jet_derivative_of_rate_matches_slope(family):
    spec = sg.SigmoidSpec(family)
    x = sample_inputs(spec)
    d = sg.evaluate(spec, Jet.variable(x, 2)).derivatives()
    np.testing.assert_allclose(d[1], sg.deriv(spec, x), rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("family", sorted(sg.INVERTIBLE, key=lambda f: f.value))
def test_inverse_round_trip(family):
    spec = sg.SigmoidSpec(family)
    y = interior_points(spec)
    np.testing.assert_allclose(sg.evaluate(spec, sg.inverse(spec, y)), y, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("family", sorted(sg.INVERTIBLE - {sg.Family.PIECEWISE_LINEAR},
                                          key=lambda f: f.value))
def test_inverse_jet_derivatives(family):
    # d/dt F(phi(y(t))) = y'(t) to all orders
    spec = sg.SigmoidSpec(family)
    y0 = interior_points(spec, 3)[1]
    y = Jet(np.array([y0, 0.1, -0.05, 0.02]))
    back = sg.evaluate(spec, sg.inverse(spec, y))
    np.testing.assert_allclose(back.c, y.c, rtol=1e-8, atol=1e-9)


@pytest.mark.parametrize("family", sorted(sg.INVERTIBLE, key=lambda f: f.value))
def test_inverse_outside_range_raises_domain_error(family):
    spec = sg.SigmoidSpec(family)
    lo, hi = sg.value_range(spec)
    bad = lo - 0.5 if math.isfinite(lo) else hi + 0.5
    with pytest.raises(DomainError) as info:
        sg.inverse(spec, bad, channel="probe")
    assert info.value.channel == "probe"
    with pytest.raises(DomainError):
        sg.inverse(spec, lo)


def test_heaviside_is_not_invertible_nor_differentiable():
    h = sg.heaviside()
    assert sg.evaluate(h, 0.0) == 0.0
    assert sg.evaluate(h, 1e-12) == 1.0
    with pytest.raises(UnsupportedOperation):
        sg.inverse(h, 0.5)
    with pytest.raises(UnsupportedOperation):
        sg.deriv(h, 0.5)


def test_logistic_closed_forms():
    s = sg.logistic(beta=2.0, vT=0.5)
    x = np.linspace(-2, 2, 7)
    F = sg.evaluate(s, x)
    np.testing.assert_allclose(F, 1 / (1 + np.exp(-2 * (x - 0.5))))
    np.testing.assert_allclose(sg.deriv(s, x), 2 * F * (1 - F))
    np.testing.assert_allclose(sg.inverse(s, F), x, atol=1e-12)


def test_piecewise_linear_saturates_at_one():
    s = sg.SigmoidSpec(sg.Family.PIECEWISE_LINEAR, {"beta": 2.0, "xi0": 1.0})
    assert sg.evaluate(s, 0.0) == 0.0
    assert sg.evaluate(s, 1.25) == pytest.approx(0.5)
    assert sg.evaluate(s, 5.0) == 1.0


@pytest.mark.parametrize("family", sorted(sg.MONOTONE, key=lambda f: f.value))
@given(st.floats(-5, 5), st.floats(0.01, 3))
def test_monotone_families_increase(family, x, dx):
    spec = sg.SigmoidSpec(family)
    assert sg.evaluate(spec, x + dx) >= sg.evaluate(spec, x)


def test_noisy_rate_is_smooth_through_threshold():
    s = sg.SigmoidSpec(sg.Family.NOISY_RATE, {"beta": 0.5})
    x = np.array([-1e-9, 0.0, 1e-9])
    np.testing.assert_allclose(sg.evaluate(s, x), math.sqrt(0.5), rtol=1e-8)


def test_inverse_deriv_is_reciprocal_slope():
    s = sg.logistic()
    y = np.array([0.2, 0.5, 0.9])
    np.testing.assert_allclose(sg.inverse_deriv(s, y), 1 / (y * (1 - y)))
