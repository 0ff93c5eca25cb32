"""Wilson-Cowan rate models and integrate-and-fire presets.

Flat parametrizations, open-loop inputs, tracking feedback and the blended
open-to-closed-loop law.  Control laws are plain callables ``u(t, x)``.

Conventions
-----------
* Weakly coupled population: ``tau v' = -v + F(w v + I)``.
* Full E-I pair::

      tau_e ve' = -ve + Fe(w_ee ve - w_ie vi + Ie)
      tau_i vi' = -vi + Fi(w_ii vi - w_ei ve + Ii)

* Asymmetric pair (currents ``Ie = 0``, ``Ii = 2 I``)::

      tau_e ve' = -ve + Fe(-w_i vi)
      tau_i vi' = -vi + Fi(2 I - w_e ve)
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Callable, Mapping

import numpy as np

from . import jets
from . import sigmoids as sg
from .errors import ConfigurationError, DivergenceError, DomainError, SaturationError
from .integrate import IntegratorConfig, SimResult, integrate
from .trajectory import RefTrajectory

__all__ = [
    "WeakEIParams",
    "WilsonCowanParams",
    "AsymWCParams",
    "TrackingGains",
    "IFKind",
    "IFPreset",
    "weak_rhs",
    "weak_open_loop",
    "weak_closed_loop",
    "weak_residual",
    "simulate_weak",
    "measured_decay_rate",
    "wc_rhs",
    "wc_flat_inputs",
    "wc_closed_loop",
    "wc_residuals",
    "simulate_wc",
    "asym_rhs",
    "asym_flat",
    "asym_residuals",
    "asym_closed_loop",
    "asym_initial_state",
    "simulate_asym",
    "switched_law",
    "switching_bound",
    "if_rhs",
    "simulate_if",
    "rate_model_equivalence",
]


def _check_invertible(spec, name):
    if spec.family not in sg.INVERTIBLE:
        raise ConfigurationError(f"{name} must be invertible, got {spec.family.value}")


@dataclass(frozen=True)
class WeakEIParams:
    tau: float = 1.0
    w: float = 1.0
    F: sg.SigmoidSpec = field(default_factory=sg.logistic)

    def __post_init__(self):
        if not self.tau > 0:
            raise ConfigurationError("tau must be > 0")
        _check_invertible(self.F, "F")


@dataclass(frozen=True)
class WilsonCowanParams:
    tauE: float = 1.0
    tauI: float = 0.5
    wEE: float = 1.5
    wIE: float = 1.0
    wEI: float = 1.0
    wII: float = 0.5
    Fe: sg.SigmoidSpec = field(default_factory=sg.logistic)
    Fi: sg.SigmoidSpec = field(default_factory=sg.logistic)

    def __post_init__(self):
        if not (self.tauE > 0 and self.tauI > 0):
            raise ConfigurationError("time constants must be > 0")
        if min(self.wEE, self.wIE, self.wEI, self.wII) < 0:
            raise ConfigurationError("weights must be >= 0")
        _check_invertible(self.Fe, "Fe")
        _check_invertible(self.Fi, "Fi")


@dataclass(frozen=True)
class AsymWCParams:
    tauE: float = 1.0
    tauI: float = 0.5
    wI: float = 4.0
    wE: float = 2.0
    Fe: sg.SigmoidSpec = field(default_factory=lambda: sg.logistic(1.0, -2.0))
    Fi: sg.SigmoidSpec = field(default_factory=sg.logistic)
    a: float = -1.0

    def __post_init__(self):
        if not (self.tauE > 0 and self.tauI > 0):
            raise ConfigurationError("time constants must be > 0")
        if not self.wI > 0:
            raise ConfigurationError("wI must be > 0 (it divides the flat parametrization)")
        if self.a != -1.0:
            raise ConfigurationError("only the fully asymmetric case a = -1 is supported")
        _check_invertible(self.Fe, "Fe")
        _check_invertible(self.Fi, "Fi")


@dataclass(frozen=True)
class TrackingGains:
    """``lam`` sets first-order decay; ``mu`` adds damping for second-order errors."""

    lam: float = 2.0
    mu: float | None = None

    def __post_init__(self):
        if not self.lam > 0:
            raise ConfigurationError("lambda must be > 0")
        if self.mu is not None and not self.mu > 0:
            raise ConfigurationError("mu must be > 0")


def _tagged(exc, t):
    if isinstance(exc, DomainError) and exc.time is None and np.ndim(t) == 0:
        exc.time = float(t)
    return exc


# ---------------------------------------------------------------------------
# weakly coupled population
# ---------------------------------------------------------------------------

def weak_rhs(p: WeakEIParams, law: Callable) -> Callable:
    def f(t, x):
        I = law(t, x[0])
        return np.array([(-x[0] + sg.evaluate(p.F, p.w * x[0] + I)) / p.tau])

    return f


def weak_open_loop(p: WeakEIParams, ref: RefTrajectory, t):
    """Input that makes ``ref`` an exact solution: ``-w v_r + phi(tau v_r' + v_r)``."""
    d = ref.derivs(t, 1)
    try:
        return -p.w * d[0] + sg.inverse(p.F, p.tau * d[1] + d[0], channel="weak open loop")
    except DomainError as e:
        raise _tagged(e, t)


def weak_closed_loop(p: WeakEIParams, g: TrackingGains, ref: RefTrajectory, t, v):
    """Tracking law ``-w v + phi(tau v_r' + v - tau lam e)``; gives ``e' = -lam e``."""
    d = ref.derivs(t, 1)
    e = v - d[0]
    try:
        return -p.w * v + sg.inverse(p.F, p.tau * d[1] + v - p.tau * g.lam * e,
                                     channel="weak closed loop")
    except DomainError as e_:
        raise _tagged(e_, t)


def weak_residual(p: WeakEIParams, ref: RefTrajectory, I, t):
    """``tau v' + v - F(w v + I)`` along the reference."""
    d = ref.derivs(t, 1)
    return p.tau * d[1] + d[0] - sg.evaluate(p.F, p.w * d[0] + I)


def simulate_weak(p: WeakEIParams, law: Callable, v0: float, cfg: IntegratorConfig,
                  ref: RefTrajectory | None = None) -> SimResult:
    """Integrate the weak model under ``law(t, v)``; adds ``I`` (and ``v_ref``, ``e``)."""
    res = integrate(weak_rhs(p, law), [v0], cfg, names=("v",))
    v = res.states[:, 0]
    res.add_channel("I", np.array([law(t, x) for t, x in zip(res.times, v)]))
    if ref is not None:
        vr = ref(res.times)
        res.add_channel("v_ref", vr)
        res.add_channel("e", v - vr)
    return res


def measured_decay_rate(times, err, floor=1e-9):
    """Least-squares slope of ``-log|e|`` over the samples with ``|e| > floor``."""
    times = np.asarray(times)
    err = np.abs(np.asarray(err))
    keep = err > floor
    if keep.sum() < 3:
        raise ConfigurationError("not enough samples above the floor to fit a rate")
    slope = np.polyfit(times[keep], np.log(err[keep]), 1)[0]
    return -slope


# ---------------------------------------------------------------------------
# full Wilson-Cowan pair
# ---------------------------------------------------------------------------

def wc_rhs(p: WilsonCowanParams, law: Callable) -> Callable:
    def f(t, x):
        ve, vi = x
        Ie, Ii = law(t, x)
        return np.array([
            (-ve + sg.evaluate(p.Fe, p.wEE * ve - p.wIE * vi + Ie)) / p.tauE,
            (-vi + sg.evaluate(p.Fi, p.wII * vi - p.wEI * ve + Ii)) / p.tauI,
        ])

    return f


def wc_flat_inputs(p: WilsonCowanParams, ve_ref: RefTrajectory, vi_ref: RefTrajectory, t):
    """Inputs ``(Ie, Ii)`` that make the reference pair an exact solution."""
    de = ve_ref.derivs(t, 1)
    di = vi_ref.derivs(t, 1)
    try:
        Ie = p.wIE * di[0] - p.wEE * de[0] + sg.inverse(p.Fe, p.tauE * de[1] + de[0],
                                                         channel="excitatory")
        Ii = p.wEI * de[0] - p.wII * di[0] + sg.inverse(p.Fi, p.tauI * di[1] + di[0],
                                                         channel="inhibitory")
    except DomainError as e:
        raise _tagged(e, t)
    return Ie, Ii


def wc_closed_loop(p: WilsonCowanParams, g: TrackingGains, ve_ref, vi_ref, t, x):
    """Per-population tracking: each error obeys ``e' = -lam e``."""
    ve, vi = x
    de = ve_ref.derivs(t, 1)
    di = vi_ref.derivs(t, 1)
    ee, ei = ve - de[0], vi - di[0]
    try:
        Ie = p.wIE * vi - p.wEE * ve + sg.inverse(
            p.Fe, p.tauE * de[1] + ve - p.tauE * g.lam * ee, channel="excitatory")
        Ii = p.wEI * ve - p.wII * vi + sg.inverse(
            p.Fi, p.tauI * di[1] + vi - p.tauI * g.lam * ei, channel="inhibitory")
    except DomainError as e:
        raise _tagged(e, t)
    return Ie, Ii


def wc_residuals(p: WilsonCowanParams, ve_ref, vi_ref, Ie, Ii, t):
    de = ve_ref.derivs(t, 1)
    di = vi_ref.derivs(t, 1)
    re = p.tauE * de[1] + de[0] - sg.evaluate(p.Fe, p.wEE * de[0] - p.wIE * di[0] + Ie)
    ri = p.tauI * di[1] + di[0] - sg.evaluate(p.Fi, p.wII * di[0] - p.wEI * de[0] + Ii)
    return re, ri


def simulate_wc(p: WilsonCowanParams, law: Callable, x0, cfg: IntegratorConfig,
                refs=None) -> SimResult:
    res = integrate(wc_rhs(p, law), x0, cfg, names=("ve", "vi"))
    inputs = np.array([law(t, x) for t, x in zip(res.times, res.states)])
    res.add_channel("Ie", inputs[:, 0])
    res.add_channel("Ii", inputs[:, 1])
    if refs is not None:
        for name, r, col in (("ve", refs[0], 0), ("vi", refs[1], 1)):
            vr = r(res.times)
            res.add_channel(f"{name}_ref", vr)
            res.add_channel(f"e_{name}", res.states[:, col] - vr)
    return res


# ---------------------------------------------------------------------------
# asymmetric pair
# ---------------------------------------------------------------------------

def asym_rhs(p: AsymWCParams, law: Callable) -> Callable:
    def f(t, x):
        ve, vi = x
        I = law(t, x)
        return np.array([
            (-ve + sg.evaluate(p.Fe, -p.wI * vi)) / p.tauE,
            (-vi + sg.evaluate(p.Fi, 2.0 * I - p.wE * ve)) / p.tauI,
        ])

    return f


def _asym_vi_jet(p, ve):
    """Jet of ``vi = -phi_e(tau_e ve' + ve) / w_i`` (one order lower than ``ve``)."""
    arg = p.tauE * jets.diff(ve) + ve
    return -sg.inverse(p.Fe, arg, channel="excitatory inversion") / p.wI


def asym_flat(p: AsymWCParams, ve_ref: RefTrajectory, t):
    """``(vi, I)`` along the reference, both exact functions of ``ve`` and its derivatives."""
    try:
        ve = ve_ref.jet(t, 2)
        vi = _asym_vi_jet(p, ve)
        vi_v, vi_d = vi.derivative(0), vi.derivative(1)
        I = 0.5 * (p.wE * ve.value + sg.inverse(p.Fi, p.tauI * vi_d + vi_v,
                                                channel="inhibitory inversion"))
    except DomainError as e:
        raise _tagged(e, t)
    return vi_v, I


def asym_residuals(p: AsymWCParams, ve_ref: RefTrajectory, t):
    """Dynamics residuals of both equations along the flat parametrization."""
    ve = ve_ref.jet(t, 2)
    vi = _asym_vi_jet(p, ve)
    _, I = asym_flat(p, ve_ref, t)
    re = p.tauE * ve.derivative(1) + ve.value - sg.evaluate(p.Fe, -p.wI * vi.value)
    ri = p.tauI * vi.derivative(1) + vi.value - sg.evaluate(p.Fi, 2.0 * I - p.wE * ve.value)
    return re, ri


SLOPE_FLOOR = 1e-12


def asym_closed_loop(p: AsymWCParams, g: TrackingGains, ref: RefTrajectory, t, state):
    """Tracking law giving ``e'' = -lam e - mu e'`` for ``e = ve - ve_ref``.

    ``state`` is ``(ve, vi)`` or ``(ve, vi, dve)``; when ``dve`` is omitted it
    is computed from the excitatory equation.
    """
    if g.mu is None:
        raise ConfigurationError("the asymmetric law needs a damping gain mu")
    ve, vi = state[0], state[1]
    fe_arg = -p.wI * vi
    dve = state[2] if len(state) > 2 else (-ve + sg.evaluate(p.Fe, fe_arg)) / p.tauE
    slope = sg.deriv(p.Fe, fe_arg)
    if np.any(np.abs(slope) < SLOPE_FLOOR):
        raise SaturationError(f"excitatory slope {slope:.3g} vanished at t={t}")
    d = ref.derivs(t, 2)
    e = ve - d[0]
    de = dve - d[1]
    corr = p.tauI * p.tauE / (p.wI * slope) * (-dve / p.tauE - d[2] + g.lam * e + g.mu * de)
    try:
        return 0.5 * (p.wE * ve + sg.inverse(p.Fi, vi + corr, channel="asymmetric closed loop"))
    except DomainError as e_:
        raise _tagged(e_, t)


def asym_initial_state(p: AsymWCParams, ref: RefTrajectory, e0=0.0, de0=0.0, t0=0.0):
    """State ``(ve, vi)`` with ``e(t0) = e0`` and ``e'(t0) = de0``."""
    d = ref.derivs(t0, 1)
    ve = d[0] + e0
    dve = d[1] + de0
    vi = -sg.inverse(p.Fe, p.tauE * dve + ve, channel="initial state") / p.wI
    return np.array([float(ve), float(vi)])


def simulate_asym(p: AsymWCParams, law: Callable, x0, cfg: IntegratorConfig,
                  ref: RefTrajectory | None = None) -> SimResult:
    res = integrate(asym_rhs(p, law), x0, cfg, names=("ve", "vi"))
    res.add_channel("I", np.array([law(t, x) for t, x in zip(res.times, res.states)]))
    if ref is not None:
        vr = ref(res.times)
        res.add_channel("ve_ref", vr)
        res.add_channel("e", res.states[:, 0] - vr)
    return res


# ---------------------------------------------------------------------------
# blending
# ---------------------------------------------------------------------------

def _check_unit_range(sigma):
    if sigma.family in (sg.Family.LOGISTIC, sg.Family.TRAUB, sg.Family.PIECEWISE_LINEAR):
        return
    if sigma.family is sg.Family.HEAVISIDE and sigma["F0"] == 1.0:
        return
    raise ConfigurationError("the blending sigmoid must be monotone with range (0, 1)")


def switched_law(u_open: Callable, u_closed: Callable, t_sw: float,
                 sigma: sg.SigmoidSpec) -> Callable:
    """``(1 - s) u_open + s u_closed`` with ``s = sigma(t - t_sw)``."""
    _check_unit_range(sigma)

    def u(t, *x):
        s = sg.evaluate(sigma, t - t_sw)
        uo = u_open(t, *x)
        if s == 0.0:
            return uo
        uc = u_closed(t, *x)
        return (1.0 - s) * uo + s * uc

    return u


def switching_bound(p: WeakEIParams, g: TrackingGains, ref: RefTrajectory, times, v,
                    n_grid=2001):
    """Gap ``|I_c - I_o|`` and its Lipschitz bound along a sampled run.

    The bound is ``(w + gamma |1 - tau lam|) |e|`` where ``gamma`` is the
    largest slope of ``phi`` over the interval of arguments visited by both
    laws.  Returns ``(gap, bound, gamma)`` arrays/scalars.
    """
    times = np.asarray(times)
    v = np.asarray(v)
    d = ref.derivs(times, 1)
    e = v - d[0]
    y_open = p.tau * d[1] + d[0]
    y_closed = y_open + (1.0 - p.tau * g.lam) * e
    Io = -p.w * d[0] + sg.inverse(p.F, y_open)
    Ic = -p.w * v + sg.inverse(p.F, y_closed)
    lo = min(y_open.min(), y_closed.min())
    hi = max(y_open.max(), y_closed.max())
    grid = np.linspace(lo, hi, n_grid)
    gamma = float(np.max(np.abs(sg.inverse_deriv(p.F, grid))))
    gap = np.abs(Ic - Io)
    bound = (p.w + gamma * abs(1.0 - p.tau * g.lam)) * np.abs(e)
    return gap, bound, gamma


# ---------------------------------------------------------------------------
# integrate-and-fire presets
# ---------------------------------------------------------------------------

class IFKind(str, Enum):
    LEAKY = "Leaky"
    QUADRATIC = "Quadratic"
    EXPONENTIAL = "Exponential"
    IZHIKEVICH_2VAR = "Izhikevich2Var"
    IZHIKEVICH_CONDUCTANCE = "IzhikevichConductance"


_IF_DEFAULTS = {
    IFKind.LEAKY: {"C": 1.0, "gL": 1.0, "vL": 0.0},
    IFKind.QUADRATIC: {"C": 1.0, "gL": 1.0, "vL": 0.0, "DeltaT": 1.0, "vT": 1.0, "IT": 0.0},
    IFKind.EXPONENTIAL: {"C": 1.0, "gL": 1.0, "vL": 0.0, "DeltaT": 1.0, "vT": 1.0},
    IFKind.IZHIKEVICH_2VAR: {"a": 0.0, "b": 0.0},
    IFKind.IZHIKEVICH_CONDUCTANCE: {"a": 0.0, "b": 0.0, "E": 1.0},
}
TWO_VARIABLE = frozenset({IFKind.IZHIKEVICH_2VAR, IFKind.IZHIKEVICH_CONDUCTANCE})


@dataclass(frozen=True)
class IFPreset:
    """Integrate-and-fire ODE without a reset rule.

    Scalar kinds integrate ``C v' = -gL (v - vL) + F(v) + I``; the two
    variable kinds integrate ``v' = v^2 - mu (+ conductance) + I`` with
    ``mu' = a (b v - mu)``.  ``v_escape`` bounds ``|v|``: leaving it raises
    ``DivergenceError`` (expected for super-linear ``F``).
    """

    kind: IFKind = IFKind.LEAKY
    params: Mapping = field(default_factory=dict)
    v_escape: float = 1e6

    def __post_init__(self):
        kind = IFKind(self.kind)
        merged = dict(_IF_DEFAULTS[kind])
        for k, v in dict(self.params).items():
            if k not in merged:
                raise ConfigurationError(f"{kind.value} has no parameter {k!r}")
            merged[k] = float(v)
        if "C" in merged and not merged["C"] > 0:
            raise ConfigurationError("C must be > 0")
        if "DeltaT" in merged and not merged["DeltaT"] > 0:
            raise ConfigurationError("DeltaT must be > 0")
        for k, v in merged.items():
            if not math.isfinite(v):
                raise ConfigurationError(f"parameter {k} must be finite")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "params", MappingProxyType(merged))

    @property
    def dim(self):
        return 2 if self.kind in TWO_VARIABLE else 1

    def spike_current(self, v):
        p = self.params
        if self.kind is IFKind.LEAKY:
            return 0.0 * v
        if self.kind is IFKind.QUADRATIC:
            return p["gL"] / (2 * p["DeltaT"]) * (v - p["vT"]) ** 2 + p["gL"] * (v - p["vT"]) - p["IT"]
        if self.kind is IFKind.EXPONENTIAL:
            return p["gL"] * p["DeltaT"] * np.exp((v - p["vT"]) / p["DeltaT"])
        return v * v


def if_rhs(preset: IFPreset, I: Callable) -> Callable:
    p = preset.params
    kind = preset.kind

    def f(t, x):
        v = x[0]
        if abs(v) > preset.v_escape:
            raise DivergenceError(f"membrane potential escaped |v| > {preset.v_escape:g} "
                                  f"at t={t:.6g}", time=t)
        if kind in TWO_VARIABLE:
            mu = x[1]
            drive = mu * (p["E"] - v) if kind is IFKind.IZHIKEVICH_CONDUCTANCE else mu
            return np.array([preset.spike_current(v) - drive + I(t), p["a"] * (p["b"] * v - mu)])
        return np.array([(-p["gL"] * (v - p["vL"]) + preset.spike_current(v) + I(t)) / p["C"]])

    return f


def simulate_if(preset: IFPreset, I: Callable, x0, cfg: IntegratorConfig) -> SimResult:
    """Raw trajectory; no spike reset is applied."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.size != preset.dim:
        raise ConfigurationError(f"{preset.kind.value} needs {preset.dim} initial values")
    names = ("v", "mu") if preset.dim == 2 else ("v",)
    res = integrate(if_rhs(preset, I), x0, cfg, names=names)
    res.add_channel("I", np.array([I(t) for t in res.times]))
    return res


def rate_model_equivalence(W, F: sg.SigmoidSpec, I, tau: float, rho0, cfg: IntegratorConfig):
    """Compare the synaptic and membrane rate models for constant ``I``.

    Integrates ``tau rho' = -rho + F(W rho + I)`` and, independently,
    ``tau v' = -v + W F(v) + I`` from ``v(0) = W rho(0) + I``.  Returns
    ``(max |W rho + I - v|, max residual)``, the residual being that of the
    membrane model along ``W rho + I`` with ``v'`` taken from the synaptic
    model.
    """
    W = np.atleast_2d(np.asarray(W, dtype=float))
    I = np.atleast_1d(np.asarray(I, dtype=float))
    rho0 = np.atleast_1d(np.asarray(rho0, dtype=float))

    def syn(t, rho):
        return (-rho + sg.evaluate(F, W @ rho + I)) / tau

    def mem(t, v):
        return (-v + W @ sg.evaluate(F, v) + I) / tau

    rs = integrate(syn, rho0, cfg)
    vs = integrate(mem, W @ rho0 + I, cfg)
    v_from_rho = rs.states @ W.T + I
    if cfg.method.value == "RK4Fixed":
        gap = np.max(np.abs(v_from_rho - vs.states))
    else:
        gap = np.max(np.abs(v_from_rho - vs.at(rs.times)))
    resid = 0.0
    for rho, v in zip(rs.states, v_from_rho):
        dv = W @ syn(0.0, rho)
        resid = max(resid, float(np.max(np.abs(tau * dv + v - W @ sg.evaluate(F, v) - I))))
    return float(gap), resid
