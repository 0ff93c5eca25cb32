import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flatneuro.errors import ConfigurationError, DivergenceError, SingularityError, StiffnessError
from flatneuro.integrate import IntegratorConfig, integrate, second_order_error


def decay(t, x):
    return -x


def oscillator(t, x):
    return np.array([x[1], -x[0]])


@pytest.mark.parametrize("cfg", [IntegratorConfig.fixed(2.0, 1e-3),
                                 IntegratorConfig.adaptive(2.0, 1e-10, 1e-12)])
def test_linear_decay_matches_exponential(cfg):
    res = integrate(decay, [1.0], cfg)
    np.testing.assert_allclose(res.states[:, 0], np.exp(-res.times), atol=1e-9)
    assert res.times[-1] == 2.0


def test_rk4_is_fourth_order():
    errs = []
    for dt in (0.1, 0.05, 0.025):
        res = integrate(oscillator, [1.0, 0.0], IntegratorConfig.fixed(5.0, dt))
        errs.append(abs(res.states[-1, 0] - math.cos(5.0)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 3.8)


def test_adaptive_matches_fine_fixed_step():
    ad = IntegratorConfig.adaptive(3.0)
    res = integrate(oscillator, [1.0, 0.0], ad)
    fine = integrate(oscillator, [1.0, 0.0], IntegratorConfig.fixed(3.0, 1e-4))
    gap = np.max(np.abs(res.states - fine.at(res.times)))
    assert gap < 10 * (ad.abs_tol + ad.rel_tol)


@pytest.mark.filterwarnings("ignore:overflow:RuntimeWarning")
def test_divergence_is_reported_with_time_and_partial_result():
    with pytest.raises(DivergenceError) as info:
        integrate(lambda t, x: x * x, [1.0], IntegratorConfig.fixed(2.0, 1e-3))
    err = info.value
    assert 0.9 < err.time < 1.1
    assert err.partial.times.size > 100
    assert np.all(np.isfinite(err.partial.states))


def test_errors_raised_by_the_field_carry_the_partial_result():
    def f(t, x):
        if t > 0.5:
            raise SingularityError("blocked", time=t)
        return -x

    with pytest.raises(SingularityError) as info:
        integrate(f, [1.0], IntegratorConfig.adaptive(1.0), names=("x",))
    assert info.value.partial.names == ("x",)
    assert info.value.partial.times[-1] <= 0.5 + 1e-9


def test_stiff_problem_underflows_step():
    # finite-time blow-up with a smooth field: adaptive steps collapse first
    with pytest.raises((StiffnessError, DivergenceError)):
        integrate(lambda t, x: 1.0 + x ** 4, [0.0], IntegratorConfig.adaptive(5.0, 1e-8, 1e-10))


@pytest.mark.parametrize("kwargs", [dict(dt=0.0), dict(rel_tol=-1.0), dict(t_end=0.0),
                                    dict(max_step=0.0), dict(method="Euler")])
def test_invalid_configs_rejected(kwargs):
    with pytest.raises((ConfigurationError, ValueError)):
        IntegratorConfig(**kwargs)


def test_shape_mismatch_rejected():
    with pytest.raises(ConfigurationError):
        integrate(lambda t, x: np.zeros(3), [1.0, 2.0], IntegratorConfig.fixed(1.0, 0.1))


def test_sim_result_access_and_resample():
    res = integrate(oscillator, [1.0, 0.0], IntegratorConfig.adaptive(1.0, 1e-9, 1e-12),
                    names=("x", "v"))
    res.add_channel("energy", res["x"] ** 2 + res["v"] ** 2)
    np.testing.assert_allclose(res["energy"], 1.0, atol=1e-8)
    r2 = res.resample(0.1)
    assert r2.times.size == 11
    np.testing.assert_allclose(r2["x"], np.cos(r2.times), atol=1e-3)
    with pytest.raises(KeyError):
        res["missing"]


def test_fixed_step_is_deterministic():
    cfg = IntegratorConfig.fixed(1.0, 1e-2)
    a = integrate(oscillator, [1.0, 0.0], cfg)
    b = integrate(oscillator, [1.0, 0.0], cfg)
    assert np.array_equal(a.states, b.states)


@given(st.floats(0.5, 20), st.floats(-1, 1), st.floats(-1, 1))
def test_second_order_error_solves_the_ode(kp, e0, de0):
    kd = 2.5 * math.sqrt(kp)
    t = np.linspace(0, 3, 301)
    e, env = second_order_error(kp, kd, e0, de0, t)
    assert e[0] == pytest.approx(e0, abs=1e-12)
    res = integrate(lambda s, x: np.array([x[1], -kp * x[0] - kd * x[1]]), [e0, de0],
                    IntegratorConfig.fixed(3.0, 1e-2))
    np.testing.assert_allclose(res.states[:, 0], e, atol=1e-6)
    assert np.all(np.abs(e) <= env + 1e-12)


def test_second_order_error_double_root():
    t = np.linspace(0, 2, 5)
    e, env = second_order_error(4.0, 4.0, 1.0, 0.0, t)
    np.testing.assert_allclose(e, (1 + 2 * t) * np.exp(-2 * t))
    with pytest.raises(ConfigurationError):
        second_order_error(10.0, 1.0, 1.0, 0.0, t)
