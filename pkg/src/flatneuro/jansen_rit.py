"""Three-population Jansen-Rit model.

Model, with ``d_k = (d/dt + kappa_k)^2``::

    d_e v1 = kappa_e m_e (w13 F(v3) + u)
    d_i v2 = kappa_i m_i w23 F(v3)
    d_e v3 = kappa_e m_e (w31 F(v1) + w32 F(v2))
    y = v3

``v2`` is a flat output: ``v3``, ``v1`` and ``u`` follow from it and its
first six derivatives.  ``v3`` parametrizes the rest up to the solution of a
linear ODE for ``v2``, which is evaluated by a convolution.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from . import _kernels
from . import jets
from . import sigmoids as sg
from .errors import ConfigurationError, DomainError
from .integrate import IntegratorConfig, SimResult, integrate
from .jets import Jet
from .trajectory import RefTrajectory

__all__ = [
    "JansenRitParams",
    "FlatChain",
    "jr_from_flat",
    "jr_residuals",
    "open_loop_input",
    "initial_state",
    "exp_at",
    "exp_at_series",
    "v2_from_v3",
    "jr_rhs",
    "jr_simulate",
    "fixed_point",
    "tabulated",
    "interior_margin",
    "auto_amplitude_reference",
]

FLAT_ORDER = 6  # derivatives of v2 needed to reach u


@dataclass(frozen=True)
class JansenRitParams:
    """Rate constants, maximal responses, coupling weights and rate function.

    The defaults are unit-normalized values (not physiological ones).
    """

    kappaE: float = 1.0
    kappaI: float = 1.0
    mE: float = 1.0
    mI: float = 1.0
    w13: float = 1.0
    w23: float = 1.0
    w31: float = 1.0
    w32: float = 1.0
    F: sg.SigmoidSpec = field(default_factory=sg.logistic)

    def __post_init__(self):
        for name in ("kappaE", "kappaI", "mE", "mI", "w23", "w31"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be > 0")


def _d_op(x: Jet, kappa):
    """``(d/dt + kappa)^2 x``, two orders lower."""
    dx = jets.diff(x)
    ddx = jets.diff(dx)
    return ddx + 2.0 * kappa * dx + kappa * kappa * x


@dataclass
class FlatChain:
    """Jets of the model variables along a flat-output path.

    ``v2`` has order ``k``, ``v3`` order ``k-2``, ``v1`` order ``k-4`` and
    ``u`` order ``k-6`` (``None`` when ``k < 6``).
    """

    v1: Jet
    v2: Jet
    v3: Jet
    u: Jet | None


def jr_from_flat(p: JansenRitParams, v2) -> FlatChain:
    """Reconstruct ``v3``, ``v1`` and ``u`` from ``v2`` and its derivatives.

    ``v2`` is either a :class:`Jet` or an array of derivatives
    ``[v2, v2', ..., v2^(k)]`` with ``k >= 4`` (``k >= 6`` to also get ``u``).
    Raises ``DomainError`` naming the inversion that left the sigmoid range.
    """
    if not isinstance(v2, Jet):
        v2 = Jet.from_derivatives(np.asarray(v2, dtype=float))
    if v2.order < 4:
        raise ConfigurationError("need at least four derivatives of v2")
    y3 = _d_op(v2, p.kappaI) / (p.kappaI * p.mI * p.w23)
    v3 = sg.inverse(p.F, y3, channel="v3 from the inhibitory equation")
    y1 = (_d_op(v3, p.kappaE) / (p.kappaE * p.mE)
          - p.w32 * sg.evaluate(p.F, jets.truncate(v2, v3.order - 2))) / p.w31
    v1 = sg.inverse(p.F, y1, channel="v1 from the output equation")
    u = None
    if v1.order >= 2:
        u = _d_op(v1, p.kappaE) / (p.kappaE * p.mE) - p.w13 * sg.evaluate(
            p.F, jets.truncate(v3, v1.order - 2))
    return FlatChain(v1, v2, v3, u)


def jr_residuals(p: JansenRitParams, chain: FlatChain):
    """Residuals of the three model equations along a flat chain (value level)."""
    if chain.u is None:
        raise ConfigurationError("the chain carries no input; supply six derivatives")
    ke, ki = p.kappaE, p.kappaI
    F = lambda x: sg.evaluate(p.F, x.value)  # noqa: E731
    ra = _d_op(chain.v1, ke).value - ke * p.mE * (p.w13 * F(chain.v3) + chain.u.value)
    rb = _d_op(chain.v2, ki).value - ki * p.mI * p.w23 * F(chain.v3)
    rc = _d_op(chain.v3, ke).value - ke * p.mE * (p.w31 * F(chain.v1) + p.w32 * F(chain.v2))
    return ra, rb, rc


def open_loop_input(p: JansenRitParams, v2_ref: RefTrajectory, t):
    """Input ``u(t)`` reproducing ``v2_ref`` exactly (vectorized in ``t``)."""
    chain = jr_from_flat(p, v2_ref.derivs(t, FLAT_ORDER))
    return chain.u.value


def initial_state(p: JansenRitParams, v2_ref: RefTrajectory, t0=0.0):
    """State ``(v1, v1', v2, v2', v3, v3')`` consistent with the reference at ``t0``."""
    c = jr_from_flat(p, v2_ref.derivs(t0, FLAT_ORDER))
    return np.array([c.v1.derivative(0), c.v1.derivative(1), c.v2.derivative(0),
                     c.v2.derivative(1), c.v3.derivative(0), c.v3.derivative(1)], dtype=float)


def interior_margin(p: JansenRitParams, v2_ref: RefTrajectory, t):
    """Smallest distance of both inverse arguments to the sigmoid range edges,
    as a fraction of the range width (negative when outside)."""
    v2 = Jet.from_derivatives(v2_ref.derivs(t, 4))
    lo, hi = sg.value_range(p.F)
    rel = lambda y: float(np.min(np.minimum(y - lo, hi - y)) / (hi - lo))  # noqa: E731
    y3 = _d_op(v2, p.kappaI) / (p.kappaI * p.mI * p.w23)
    m3 = rel(y3.value)
    if m3 <= 0:
        return m3
    v3 = sg.inverse(p.F, y3)
    y1 = (_d_op(v3, p.kappaE) / (p.kappaE * p.mE) - p.w32 * sg.evaluate(p.F, v2.value)) / p.w31
    return min(m3, rel(y1.value))


# ---------------------------------------------------------------------------
# extended Liouvillian reconstruction
# ---------------------------------------------------------------------------

def exp_at(kappa, t):
    """``exp(A t)`` for ``A = [[0, 1], [-kappa^2, -2 kappa]]`` (double eigenvalue)."""
    e = np.exp(-kappa * t)
    return np.array([[(1 + kappa * t) * e, t * e],
                     [-kappa * kappa * t * e, (1 - kappa * t) * e]])


def exp_at_series(kappa, t, terms=30):
    """Truncated power series of ``exp(A t)``, used as an independent check."""
    A = np.array([[0.0, 1.0], [-kappa * kappa, -2.0 * kappa]]) * t
    out = np.eye(2)
    term = np.eye(2)
    for k in range(1, terms):
        term = term @ A / k
        out = out + term
    return out


def v2_from_v3(p: JansenRitParams, v3, dt, v20, dv20):
    """``v2`` on a uniform grid from samples of ``v3`` and the initial pair.

    Homogeneous part from ``exp(A t)``; forced part
    ``kappa_i m_i w23 int_0^t (t - s) exp(-kappa_i (t - s)) F(v3(s)) ds`` by
    the trapezoid rule.
    """
    v3 = np.asarray(v3, dtype=float)
    k = p.kappaI
    t = dt * np.arange(v3.size)
    e = np.exp(-k * t)
    hom = v20 * (1 + k * t) * e + dv20 * t * e
    forced = _kernels.liouville_conv(sg.evaluate(p.F, v3), dt, k)
    return hom + k * p.mI * p.w23 * forced


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------

def jr_rhs(p: JansenRitParams, u: Callable) -> Callable:
    ke, ki = p.kappaE, p.kappaI
    F = p.F

    def f(t, x):
        v1, d1, v2, d2, v3, d3 = x
        f1, f2, f3 = sg.evaluate(F, np.array([v1, v2, v3]))
        return np.array([
            d1, ke * p.mE * (p.w13 * f3 + u(t)) - 2 * ke * d1 - ke * ke * v1,
            d2, ki * p.mI * p.w23 * f3 - 2 * ki * d2 - ki * ki * v2,
            d3, ke * p.mE * (p.w31 * f1 + p.w32 * f2) - 2 * ke * d3 - ke * ke * v3,
        ])

    return f


NAMES = ("v1", "dv1", "v2", "dv2", "v3", "dv3")


def jr_simulate(p: JansenRitParams, u: Callable, x0, cfg: IntegratorConfig) -> SimResult:
    """Integrate the six first-order equations; channel ``y`` is ``v3``."""
    res = integrate(jr_rhs(p, u), x0, cfg, names=NAMES)
    res.add_channel("u", np.array([u(t) for t in res.times]))
    res.add_channel("y", res.states[:, 4])
    return res


def tabulated(times, values) -> Callable:
    """Piecewise-linear signal through ``(times, values)``; exact at the nodes."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    return lambda t: float(np.interp(t, times, values))


def fixed_point(p: JansenRitParams, u0: float = 0.0):
    """Rest state under constant input ``u0`` as ``(v1, v2, v3)``.

    At rest ``kappa^2 v = kappa m (...)``, so ``v1`` and ``v2`` are explicit in
    ``v3`` and a scalar root search in ``v3`` remains.
    """
    F = lambda x: float(sg.evaluate(p.F, x))  # noqa: E731

    def parts(v3):
        v1 = p.mE * (p.w13 * F(v3) + u0) / p.kappaE
        v2 = p.mI * p.w23 * F(v3) / p.kappaI
        return v1, v2

    def g(v3):
        v1, v2 = parts(v3)
        return v3 - p.mE * (p.w31 * F(v1) + p.w32 * F(v2)) / p.kappaE

    lo, hi = -1.0, 1.0
    while g(lo) > 0:
        lo *= 2
    while g(hi) < 0:
        hi *= 2
    v3 = brentq(g, lo, hi, xtol=1e-14)
    v1, v2 = parts(v3)
    return v1, v2, v3


def auto_amplitude_reference(p: JansenRitParams, shape: RefTrajectory, offset: float,
                             hi: float, margin: float = 0.05, t_span=(0.0, 10.0), n=2001):
    """Scale ``shape`` so all inverse arguments stay within ``[margin, 1 - margin]``
    of the sigmoid range over ``t_span``."""
    from .trajectory import fit_amplitude

    t = np.linspace(*t_span, n)

    def feasible(ref):
        try:
            return interior_margin(p, ref, t) >= margin
        except DomainError:
            return False

    amp = fit_amplitude(lambda a: shape.rescaled(a, offset), feasible, hi)
    return shape.rescaled(amp, offset)
