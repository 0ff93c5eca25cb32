import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from flatneuro import jansen_rit as jr
from flatneuro import sigmoids as sg
from flatneuro.errors import ConfigurationError, DomainError
from flatneuro.integrate import IntegratorConfig
from flatneuro.trajectory import random_sinusoid_sum, sinusoid_sum

P = jr.JansenRitParams()


def feasible_ref(rng, period=20.0):
    shape = random_sinusoid_sum(rng, 0.75, 1.0, 3, period)
    return jr.auto_amplitude_reference(P, shape, 0.75, 1.0, 0.05, (0.0, period))


@given(st.floats(0.1, 5.0), st.floats(0.0, 3.0))
def test_exp_at_matches_matrix_exponential(kappa, t):
    A = np.array([[0.0, 1.0], [-kappa ** 2, -2 * kappa]])
    np.testing.assert_allclose(jr.exp_at(kappa, t), expm(A * t), atol=1e-12)


@pytest.mark.parametrize("kappa", [0.5, 1.0, 2.0])
def test_exp_at_series_converges_on_unit_interval(kappa):
    for t in np.linspace(0, 1, 11):
        assert np.max(np.abs(jr.exp_at(kappa, t) - jr.exp_at_series(kappa, t))) < 1e-12


@given(st.integers(0, 10_000))
def test_flat_chain_satisfies_model(seed):
    ref = feasible_ref(np.random.default_rng(seed))
    t = np.linspace(0, 20, 401)
    chain = jr.jr_from_flat(P, ref.derivs(t, jr.FLAT_ORDER))
    assert max(np.max(np.abs(r)) for r in jr.jr_residuals(P, chain)) < 1e-10
    assert jr.interior_margin(P, ref, t) >= 0.05 - 1e-9


def test_chain_needs_enough_derivatives():
    with pytest.raises(ConfigurationError):
        jr.jr_from_flat(P, np.zeros(3))
    chain = jr.jr_from_flat(P, [0.7, 0, 0, 0, 0])
    assert chain.u is None
    with pytest.raises(ConfigurationError):
        jr.jr_residuals(P, chain)


def test_infeasible_reference_names_the_inversion():
    ref = sinusoid_sum(5.0, [0.1], [1.0])  # far above the inhibitory range
    with pytest.raises(DomainError) as info:
        jr.open_loop_input(P, ref, 0.0)
    assert "inhibitory" in info.value.channel


def test_open_loop_tracking_and_reconstruction(rng):
    ref = feasible_ref(rng)
    dt = 1e-3
    n = 3000
    grid = np.linspace(0, n * dt, 2 * n + 1)
    u = jr.tabulated(grid, jr.open_loop_input(P, ref, grid))
    x0 = jr.initial_state(P, ref)
    res = jr.jr_simulate(P, u, x0, IntegratorConfig.fixed(n * dt, dt))
    assert np.max(np.abs(res["v2"] - ref(res.times))) < 1e-4
    v2 = jr.v2_from_v3(P, res["v3"], dt, x0[2], x0[3])
    assert np.max(np.abs(v2 - res["v2"])) < 1e-4
    np.testing.assert_array_equal(res["y"], res["v3"])


def test_reconstruction_converges_with_step(rng):
    # homogeneous plus forced parts against a fine simulation
    ref = feasible_ref(rng)
    errs = []
    for dt in (4e-3, 2e-3):
        n = int(round(2.0 / dt))
        grid = np.linspace(0, n * dt, 2 * n + 1)
        u = jr.tabulated(grid, jr.open_loop_input(P, ref, grid))
        x0 = jr.initial_state(P, ref)
        res = jr.jr_simulate(P, u, x0, IntegratorConfig.fixed(n * dt, dt))
        errs.append(np.max(np.abs(jr.v2_from_v3(P, res["v3"], dt, x0[2], x0[3]) - res["v2"])))
    assert np.log2(errs[0] / errs[1]) > 1.8


@pytest.mark.parametrize("u0", [-0.5, 0.0, 1.0])
def test_fixed_point_is_rest_state(u0):
    v1, v2, v3 = jr.fixed_point(P, u0)
    f = jr.jr_rhs(P, lambda t: u0)
    assert np.max(np.abs(f(0.0, np.array([v1, 0, v2, 0, v3, 0])))) < 1e-12


def test_params_validation():
    with pytest.raises(ConfigurationError):
        jr.JansenRitParams(kappaE=0.0)


def test_tabulated_is_exact_at_nodes():
    u = jr.tabulated([0, 1, 2], [1.0, 3.0, 2.0])
    assert u(1.0) == 3.0 and u(0.5) == 2.0


def test_auto_amplitude_is_maximal(rng):
    ref = feasible_ref(rng)
    bigger = ref.rescaled(1.01, 0.75)
    t = np.linspace(0, 20, 2001)
    try:
        margin = jr.interior_margin(P, bigger, t)
    except DomainError:
        margin = -1.0
    assert margin < 0.05
    assert sg.value_range(P.F) == (0.0, 1.0)
