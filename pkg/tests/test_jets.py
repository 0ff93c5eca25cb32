import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flatneuro import jets
from flatneuro.jets import Jet


def fd_derivs(f, x, order, h=1e-3):
    """Central finite differences of orders 0..order (order <= 2)."""
    out = [f(x), (f(x + h) - f(x - h)) / (2 * h)]
    if order >= 2:
        out.append((f(x + h) - 2 * f(x) + f(x - h)) / h ** 2)
    return np.array(out[: order + 1])


@pytest.mark.parametrize("name, f, jf", [
    ("exp", np.exp, jets.exp),
    ("log", np.log, jets.log),
    ("sqrt", np.sqrt, jets.sqrt),
    ("tanh", np.tanh, jets.tanh),
    ("power", lambda x: x ** 2.5, lambda x: jets.power(x, 2.5)),
    ("recip", lambda x: 1 / (1 + x * x), lambda x: 1 / (1 + x * x)),
])
def test_elementary_against_finite_differences(name, f, jf):
    x0 = 0.7
    got = jf(Jet.variable(x0, 2)).derivatives()
    np.testing.assert_allclose(got, fd_derivs(f, x0, 2), rtol=1e-5, atol=1e-6)


def test_exp_derivatives_exact():
    d = jets.exp(Jet.variable(0.3, 8)).derivatives()
    np.testing.assert_allclose(d, np.full(9, math.exp(0.3)), rtol=1e-14)


def test_sin_product_rule_high_order():
    # (x^3)^(k) at x0 is known in closed form
    x = Jet.variable(2.0, 5)
    np.testing.assert_allclose((x * x * x).derivatives(), [8, 12, 12, 6, 0, 0], atol=1e-12)


def test_arctan2_matches_numpy():
    t = Jet.variable(0.4, 3)
    y, x = jets.exp(t), 1.0 + t * t
    got = jets.arctan2(y, x)
    assert got.value == pytest.approx(math.atan2(math.exp(0.4), 1.16))
    f = lambda s: np.arctan2(np.exp(s), 1 + s * s)  # noqa: E731
    np.testing.assert_allclose(got.derivatives()[:3], fd_derivs(f, 0.4, 2), rtol=1e-5)


def test_diff_and_truncate():
    x = jets.exp(2.0 * Jet.variable(0.0, 4))
    d = jets.diff(x)
    assert d.order == 3
    np.testing.assert_allclose(d.derivatives(), [2, 4, 8, 16])
    assert jets.truncate(x, 1).order == 1
    with pytest.raises(ValueError):
        jets.diff(Jet.constant(1.0, 0))


@given(st.floats(-2, 2), st.integers(1, 6))
def test_compose_reproduces_direct_evaluation(x0, order):
    inner = jets.tanh(Jet.variable(x0, order))
    fd = jets.exp(Jet.variable(inner.value, order)).derivatives()
    np.testing.assert_allclose(jets.compose(fd, inner).c, jets.exp(inner).c,
                               rtol=1e-10, atol=1e-12)


@given(st.floats(-1.5, 1.5), st.integers(1, 6))
def test_revert_inverts_series(x0, order):
    # inverse of tanh is atanh; compose(revert) must give the identity jet
    fd = jets.tanh(Jet.variable(x0, order)).derivatives()
    gd = jets.revert(fd)
    gd[0] = x0
    y = jets.tanh(Jet.variable(x0, order))
    back = jets.compose(gd, y)
    ident = Jet.variable(x0, order)
    np.testing.assert_allclose(back.c, ident.c, atol=1e-8 * max(1.0, math.cosh(x0) ** (2 * order)))


def test_batched_jets_broadcast():
    t = np.linspace(0, 1, 5)
    x = Jet.variable(t, 3)
    got = jets.exp(-x).derivatives()
    assert got.shape == (4, 5)
    np.testing.assert_allclose(got[2], np.exp(-t))
