"""Scenario runners: build models from a :class:`ScenarioConfig`, simulate,
and evaluate the invariant checks each scenario is meant to demonstrate."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import arm as am
from . import jansen_rit as jr
from . import kernels as kn
from . import neural_mass as nm
from . import sigmoids as sg
from .config import ScenarioConfig, integrator_from, reference_from, sigmoid_from
from .errors import ConfigurationError
from .integrate import IntegratorConfig, Method, second_order_error
from .trajectory import random_sinusoid_sum

ROUNDOFF = 1e-12


@dataclass
class Check:
    name: str
    value: float
    limit: float
    relation: str  # "<=" or ">="
    exercises: str

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.value):
            return False
        return self.value <= self.limit if self.relation == "<=" else self.value >= self.limit

    def to_dict(self):
        return {"name": self.name, "value": self.value, "limit": self.limit,
                "relation": self.relation, "passed": self.passed, "exercises": self.exercises}


def at_most(name, value, limit, exercises):
    return Check(name, float(value), float(limit), "<=", exercises)


def at_least(name, value, limit, exercises):
    return Check(name, float(value), float(limit), ">=", exercises)


@dataclass
class Outcome:
    """What a scenario produced.

    ``columns`` become ``timeseries.csv``; ``tables`` maps a file name to
    ``(header, rows)``; ``plots`` lists ``(file, x column, y columns, title)``.
    """

    columns: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    plots: list = field(default_factory=list)


def _max_abs(x):
    return float(np.max(np.abs(x))) if np.size(x) else 0.0


# ---------------------------------------------------------------------------
# Wilson-Cowan family
# ---------------------------------------------------------------------------

def run_wc_weak(cfg: ScenarioConfig, rng) -> Outcome:
    m = "model"
    p = nm.WeakEIParams(cfg.get_float(m, "tau"), cfg.get_float(m, "w"), sigmoid_from(cfg, m, "F"))
    ref = reference_from(cfg, "reference", rng)
    g = nm.TrackingGains(cfg.get_float("gains", "lambda"))
    icfg = integrator_from(cfg)

    def u_open(t, v):
        return nm.weak_open_loop(p, ref, t)

    def u_closed(t, v):
        return nm.weak_closed_loop(p, g, ref, t, v)

    switching = cfg.has("switching")
    if switching:
        t_sw = cfg.get_float("switching", "t_sw")
        width = cfg.get_float("switching", "width")
        if not width > 0:
            raise ConfigurationError("[switching] width must be > 0")
        sigma = sg.logistic(1.0 / width, 0.0)
        law = nm.switched_law(u_open, u_closed, t_sw, sigma)
    else:
        law = u_closed

    v0 = float(ref(icfg.t_start)) + cfg.get_float("initial", "e0")
    res = nm.simulate_weak(p, law, v0, icfg, ref)
    t, v = res.times, res["v"]
    Io = nm.weak_open_loop(p, ref, t)
    Ic = nm.weak_closed_loop(p, g, ref, t, v)
    I = res["I"]
    out = Outcome()
    out.columns = {"t": t, "v": v, "I": I, "I_open": Io, "I_closed": Ic,
                   "v_ref": res["v_ref"], "e": res["e"]}

    tol = cfg.get_float("checks", "residual_tol")
    out.checks.append(at_most("flat_residual", _max_abs(nm.weak_residual(p, ref, Io, t)), tol,
                              "open-loop input reproduces the reference exactly"))
    if ref.period is not None:
        shifted = nm.weak_open_loop(p, ref, t - ref.period)
        out.checks.append(at_most("open_loop_periodicity", _max_abs(Io - shifted),
                                  cfg.get_float("checks", "cyclic_tol"),
                                  "periodic flat output gives a periodic input"))
    gap, bound, gamma = nm.switching_bound(p, g, ref, t, v)
    out.metrics["gamma"] = gamma
    out.checks.append(at_most("lipschitz_gap_excess", float(np.max(gap - bound)), ROUNDOFF,
                              "|I_c - I_o| <= (w + gamma |1 - tau lambda|) |e|"))
    if switching:
        s = sg.evaluate(sigma, t - t_sw)
        full = np.abs(Ic - Io)
        out.columns["sigma"] = s
        out.checks.append(at_most("blend_open_excess", float(np.max(np.abs(I - Io) - s * full)),
                                  ROUNDOFF, "|u - I_o| <= sigma |I_c - I_o|"))
        out.checks.append(at_most("blend_closed_excess",
                                  float(np.max(np.abs(I - Ic) - (1 - s) * full)), ROUNDOFF,
                                  "|u - I_c| <= (1 - sigma) |I_c - I_o|"))
    else:
        rate = nm.measured_decay_rate(t, res["e"])
        out.metrics["decay_rate"] = rate
        out.checks.append(at_most("decay_rate_rel_error", abs(rate - g.lam) / g.lam,
                                  cfg.get_float("checks", "decay_rel_tol"),
                                  "tracking error decays as exp(-lambda t)"))
    out.metrics["max_abs_error_final"] = float(abs(res["e"][-1]))
    out.plots = [("tracking.svg", "t", ["v", "v_ref"], "population activity"),
                 ("inputs.svg", "t", ["I", "I_open", "I_closed"], "inputs")]
    return out


def run_wc_full(cfg: ScenarioConfig, rng) -> Outcome:
    m = "model"
    p = nm.WilsonCowanParams(*(cfg.get_float(m, k) for k in ("tauE", "tauI", "wEE", "wIE",
                                                              "wEI", "wII")),
                             Fe=sigmoid_from(cfg, m, "Fe"), Fi=sigmoid_from(cfg, m, "Fi"))
    re = reference_from(cfg, "reference", rng, "ve.")
    ri = reference_from(cfg, "reference", rng, "vi.")
    g = nm.TrackingGains(cfg.get_float("gains", "lambda"))
    icfg = integrator_from(cfg)
    t0 = icfg.t_start
    x0 = [float(re(t0)) + cfg.get_float("initial", "e0_ve"),
          float(ri(t0)) + cfg.get_float("initial", "e0_vi")]
    res = nm.simulate_wc(p, lambda t, x: nm.wc_closed_loop(p, g, re, ri, t, x), x0, icfg,
                         refs=(re, ri))
    t = res.times
    out = Outcome()
    out.columns = {"t": t, "ve": res["ve"], "vi": res["vi"], "Ie": res["Ie"], "Ii": res["Ii"],
                   "ve_ref": res["ve_ref"], "vi_ref": res["vi_ref"],
                   "e_ve": res["e_ve"], "e_vi": res["e_vi"]}
    Ie, Ii = nm.wc_flat_inputs(p, re, ri, t)
    r1, r2 = nm.wc_residuals(p, re, ri, Ie, Ii, t)
    out.checks.append(at_most("flat_residual", max(_max_abs(r1), _max_abs(r2)),
                              cfg.get_float("checks", "residual_tol"),
                              "flat inputs reproduce both references exactly"))
    for name in ("e_ve", "e_vi"):
        if abs(res[name][0]) > 0:
            rate = nm.measured_decay_rate(t, res[name])
            out.metrics[f"decay_rate_{name}"] = rate
            out.checks.append(at_most(f"decay_rate_rel_error_{name}", abs(rate - g.lam) / g.lam,
                                      cfg.get_float("checks", "decay_rel_tol"),
                                      "each population error decays as exp(-lambda t)"))
    out.plots = [("tracking.svg", "t", ["ve", "ve_ref", "vi", "vi_ref"], "populations"),
                 ("inputs.svg", "t", ["Ie", "Ii"], "inputs")]
    return out


def run_wc_asym(cfg: ScenarioConfig, rng) -> Outcome:
    m = "model"
    p = nm.AsymWCParams(*(cfg.get_float(m, k) for k in ("tauE", "tauI", "wI", "wE")),
                        Fe=sigmoid_from(cfg, m, "Fe"), Fi=sigmoid_from(cfg, m, "Fi"))
    ref = reference_from(cfg, "reference", rng)
    g = nm.TrackingGains(cfg.get_float("gains", "lambda"), cfg.get_float("gains", "mu"))
    e0 = cfg.get_float("initial", "e0")
    de0 = cfg.get_float("initial", "de0")
    icfg = integrator_from(cfg)
    x0 = nm.asym_initial_state(p, ref, e0, de0, icfg.t_start)
    res = nm.simulate_asym(p, lambda t, x: nm.asym_closed_loop(p, g, ref, t, x), x0, icfg, ref)
    t = res.times
    e = res["e"]
    exact, env = second_order_error(g.lam, g.mu, e0, de0, t - icfg.t_start)
    out = Outcome()
    out.columns = {"t": t, "ve": res["ve"], "vi": res["vi"], "I": res["I"],
                   "ve_ref": res["ve_ref"], "e": e, "e_exact": exact, "envelope": env}
    r1, r2 = nm.asym_residuals(p, ref, t)
    out.checks.append(at_most("flat_residual", max(_max_abs(r1), _max_abs(r2)),
                              cfg.get_float("checks", "residual_tol"),
                              "inhibitory state and input follow from ve exactly"))
    out.checks.append(at_most("exact_error_gap", _max_abs(e - exact),
                              cfg.get_float("checks", "exact_tol"),
                              "error obeys e'' + mu e' + lambda e = 0"))
    slack = cfg.get_float("checks", "envelope_slack")
    out.checks.append(at_most("envelope_excess", float(np.max(np.abs(e) - (1 + slack) * env)),
                              0.0, "error stays under the second-order modal envelope"))
    out.plots = [("error.svg", "t", ["e", "e_exact", "envelope"], "excitatory error"),
                 ("input.svg", "t", ["I"], "input")]
    return out


# ---------------------------------------------------------------------------
# Jansen-Rit
# ---------------------------------------------------------------------------

def run_jansen_rit(cfg: ScenarioConfig, rng) -> Outcome:
    m = "model"
    p = jr.JansenRitParams(*(cfg.get_float(m, k) for k in (
        "kappaE", "kappaI", "mE", "mI", "w13", "w23", "w31", "w32")), F=sigmoid_from(cfg, m, "F"))
    icfg = integrator_from(cfg)
    if icfg.t_start != 0.0:
        raise ConfigurationError("the Jansen-Rit scenario starts at t = 0")
    sec = "reference"
    if cfg.get_str(sec, "family") != "RandomSinusoid":
        raise ConfigurationError("the Jansen-Rit scenario uses family = RandomSinusoid")
    offset = cfg.get_float(sec, "offset")
    period = cfg.get_float(sec, "period")
    shape = random_sinusoid_sum(rng, offset, 1.0, cfg.get_int(sec, "n_terms"), period)
    amp = cfg.get_str(sec, "amplitude")
    if amp == "auto":
        ref = jr.auto_amplitude_reference(p, shape, offset, 1.0, cfg.get_float(sec, "margin"),
                                          (0.0, max(period, icfg.t_end)))
    else:
        ref = shape.rescaled(cfg.get_float(sec, "amplitude"))
    amplitude = float(np.sum(np.abs(ref.params["amps"])))

    if icfg.method is Method.RK4_FIXED:
        # RK4 samples the input at whole and half steps; tabulate it there
        n = int(np.ceil((icfg.t_end - icfg.t_start) / icfg.dt - 1e-9))
        grid = np.linspace(icfg.t_start, icfg.t_start + n * icfg.dt, 2 * n + 1)
        u = jr.tabulated(grid, jr.open_loop_input(p, ref, grid))
    else:
        def u(t):
            return float(jr.open_loop_input(p, ref, t))
    x0 = jr.initial_state(p, ref, icfg.t_start)
    res = jr.jr_simulate(p, u, x0, icfg)
    t = res.times
    v2r = ref(t)
    if icfg.method is Method.RK4_FIXED:
        uniform, dt = res, icfg.dt
    else:
        dt = icfg.dt
        uniform = res.resample(dt)
    v2_rec = jr.v2_from_v3(p, uniform["v3"], dt, x0[2], x0[3])
    out = Outcome()
    out.columns = {"t": t, **{n: res[n] for n in jr.NAMES}, "u": res["u"], "v2_ref": v2r,
                   "e_v2": res["v2"] - v2r}
    if uniform is res:
        out.columns["v2_reconstructed"] = v2_rec
    tc = cfg.get_float
    chain = jr.jr_from_flat(p, ref.derivs(t, jr.FLAT_ORDER))
    out.checks.append(at_most("flat_residual", max(_max_abs(r) for r in jr.jr_residuals(p, chain)),
                              tc("checks", "residual_tol"),
                              "v3, v1 and u follow from v2 and six derivatives"))
    out.checks.append(at_most("tracking_error", _max_abs(res["v2"] - v2r),
                              tc("checks", "tracking_tol"),
                              "open-loop input reproduces the designed v2"))
    out.checks.append(at_most("reconstruction_error", _max_abs(v2_rec - uniform["v2"]),
                              tc("checks", "reconstruction_tol"),
                              "v2 recovered from v3 by the exp(At) convolution"))
    series_err = max(_max_abs(jr.exp_at(k, s) - jr.exp_at_series(k, s, 30))
                     for k in {p.kappaE, p.kappaI} for s in np.linspace(0.0, 1.0, 21))
    out.checks.append(at_most("exp_at_series_gap", series_err, tc("checks", "exp_series_tol"),
                              "closed-form exp(At) against its 30-term series"))
    out.metrics["amplitude"] = amplitude
    out.metrics["interior_margin"] = jr.interior_margin(p, ref, t)
    out.plots = [("tracking.svg", "t", ["v2", "v2_ref"], "flat output v2"),
                 ("input.svg", "t", ["u"], "open-loop input")]
    return out


# ---------------------------------------------------------------------------
# arm
# ---------------------------------------------------------------------------

def _tanh_profile(ref_y, hx):
    p = ref_y.params
    return p["yi"] + 0.5 * (p["yf"] - p["yi"]) * (1.0 + np.tanh(p["gamma"] * (hx - p["x0"])))


def run_arm(cfg: ScenarioConfig, rng) -> Outcome:
    m = "model"
    p = am.ArmParams(**{k: cfg.get_float(m, k) for k in cfg.sections[m]})
    g = am.ArmGains(cfg.get_float("gains", "kp1"), cfg.get_float("gains", "kp2"),
                    cfg.get_float("gains", "kd1"), cfg.get_float("gains", "kd2"))
    T = cfg.get_float("reference", "T")
    try:
        elbow = am.Elbow(cfg.get_str("reference", "elbow").lower())
    except ValueError:
        raise ConfigurationError("[reference] elbow must be 'up' or 'down'") from None
    rx, ry = am.reference_path(p, T, cfg.get_float("reference", "gamma"))
    icfg = integrator_from(cfg)
    x0 = am.perturbed_initial_state(p, rx, ry, T, cfg.get_float("initial", "frac"), elbow)

    def law(t, x):
        return am.arm_tracking_law(p, g, rx, ry, t, x)

    res = am.arm_simulate(p, law, x0, icfg, ref=(rx, ry),
                          open_loop=lambda t: am.arm_open_loop(p, rx, ry, t, elbow))
    t = res.times
    out = Outcome()
    out.columns = {"t": t, **{n: res[n] for n in am.NAMES}}
    for n in ("hx", "hy", "T1", "T2", "hxr", "hyr", "T1r", "T2r", "ehx", "ehy"):
        out.columns[n] = res[n]
    out.columns["hy_profile"] = _tanh_profile(ry, res["hx"])

    c = lambda k: cfg.get_float("checks", k)  # noqa: E731
    for axis in ("ehx", "ehy"):
        out.checks.append(at_most(f"final_{axis}", abs(res[axis][-1]), c("final_error_tol"),
                                  "end-effector error after the run"))
    torque_gap = max(abs(res["T1"][-1] - res["T1r"][-1]), abs(res["T2"][-1] - res["T2r"][-1]))
    out.checks.append(at_most("final_torque_gap", torque_gap, c("torque_tol"),
                              "tracking torque converges to the flat open-loop torque"))
    late = t >= c("settle")
    if late.sum() >= 2:
        out.checks.append(at_most("hx_increase_after_settle",
                                  float(np.max(np.diff(res["hx"][late]))), 0.0,
                                  "wrist x decreases monotonically along the path"))
        out.checks.append(at_most("hy_profile_gap", _max_abs(res["hy"][late] - out.columns[
            "hy_profile"][late]), c("profile_tol"), "wrist follows the tanh path hy(hx)"))
    th1, th2 = am.inverse_kinematics(p, res["hxr"], res["hyr"], elbow)
    fx, fy = am.forward_kinematics(p, th1, th2)
    out.checks.append(at_most("ik_round_trip", float(np.max(np.hypot(fx - res["hxr"],
                                                                     fy - res["hyr"]))),
                              c("ik_tol"), "inverse then forward kinematics along the path"))
    dets = p.l1 * p.l2 * np.sin(res["theta2"])
    out.metrics["min_abs_det_H"] = float(np.min(np.abs(dets)))
    out.metrics["max_abs_error_after_settle"] = (
        float(max(_max_abs(res["ehx"][late]), _max_abs(res["ehy"][late]))) if late.any() else None)
    out.plots = [("path.svg", "hx", ["hy", "hy_profile"], "wrist path (hy against hx)"),
                 ("errors.svg", "t", ["ehx", "ehy"], "end-effector errors"),
                 ("torques.svg", "t", ["T1", "T1r", "T2", "T2r"], "joint torques")]
    return out


# ---------------------------------------------------------------------------
# integrate-and-fire presets
# ---------------------------------------------------------------------------

def _if_preset(cfg):
    m = "model"
    kind = nm.IFKind(cfg.get_str(m, "kind"))
    params = {k: cfg.get_float(m, k) for k in cfg.sections[m] if k != "kind"}
    return nm.IFPreset(kind, params)


def _solver_agreement(preset, I, x0, icfg, res):
    """Gap between the run and fixed-step RK4 at ``dt = 1e-4`` on the run's nodes."""
    ref_cfg = IntegratorConfig.fixed(icfg.t_end, 1e-4, icfg.t_start)
    fine = nm.simulate_if(preset, I, x0, ref_cfg)
    return _max_abs(res.states - fine.at(res.times)), 10 * (icfg.abs_tol + icfg.rel_tol)


def run_if(cfg: ScenarioConfig, rng) -> Outcome:
    preset = _if_preset(cfg)
    I0 = cfg.get_float("input", "I")

    def I(t):
        return I0

    icfg = integrator_from(cfg)
    if preset.dim == 2:
        x0 = [cfg.get_float("initial", "v0"), cfg.get_float("initial", "mu0")]
    else:
        x0 = [cfg.get_float("initial", "v0")]
    res = nm.simulate_if(preset, I, x0, icfg)
    out = Outcome()
    out.columns = {"t": res.times, **{n: res[n] for n in res.names}, "I": res["I"]}
    if icfg.method is Method.RK45_ADAPTIVE:
        gap, limit = _solver_agreement(preset, I, x0, icfg, res)
        out.checks.append(at_most("adaptive_vs_fine_rk4", gap, limit,
                                  "adaptive result within 10 (abs_tol + rel_tol) of RK4 at 1e-4"))
    if preset.kind is nm.IFKind.LEAKY:
        q = preset.params
        v_inf = q["vL"] + I0 / q["gL"]
        exact = v_inf + (x0[0] - v_inf) * np.exp(-q["gL"] * (res.times - icfg.t_start) / q["C"])
        out.columns["v_exact"] = exact
        out.checks.append(at_most("closed_form_gap", _max_abs(res["v"] - exact),
                                  cfg.get_float("checks", "closed_form_tol"),
                                  "leaky membrane relaxes exponentially to vL + I / gL"))
    out.metrics["v_final"] = float(res["v"][-1])
    out.plots = [("membrane.svg", "t", list(res.names), preset.kind.value)]
    return out


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

def run_kernel_fourier(cfg: ScenarioConfig, rng) -> Outcome:
    zetas = cfg.get_floats("fourier", "zetas")
    rows = kn.conformance_table(zetas)
    out = Outcome()
    out.tables["conformance.csv"] = (
        ("kernel", "zeta", "closed_form_re", "closed_form_im", "numeric_re", "numeric_im",
         "abs_diff", "status"),
        [(k, z, cf.real, cf.imag, nu.real, nu.imag, d, st) for k, z, cf, nu, d, st in rows])
    verified = [r[4] for r in rows if r[5] == "verified"]
    out.checks.append(at_most("verified_max_abs_diff", max(verified),
                              cfg.get_float("checks", "tol"),
                              "tabulated transforms agree with quadrature"))
    for kind in kn.REPORTED:
        out.metrics[f"{kind.value}_max_abs_diff"] = max(r[4] for r in rows if r[0] == kind.value)
    return out


def run_kernel_pde(cfg: ScenarioConfig, rng) -> Outcome:
    f = kn.FieldParams(cfg.get_float("model", "tau_sy"), cfg.get_float("model", "I_r"))
    a = cfg.get_float("model", "a")
    amp = cfg.get_float("input", "amp")
    omega = cfg.get_float("input", "omega")

    def u(t, r):
        return amp * np.sin(omega * t) * np.cos(np.pi * r)

    levels = [int(x) for x in cfg.get_floats("refinement", "levels")]
    if len(levels) < 2:
        raise ConfigurationError("[refinement] levels needs at least two grids")
    hs, norms, orders = kn.refinement_study(f, a, u, cfg.get_float("refinement", "t_end"),
                                            tuple(levels), cfg.get_float("refinement", "courant"))
    out = Outcome()
    padded = [float("nan")] + list(orders)
    out.tables["refinement.csv"] = (("cells", "h", "residual", "order"),
                                    list(zip(levels, hs, norms, padded)))
    out.checks.append(at_least("min_observed_order", float(np.min(orders)),
                               cfg.get_float("checks", "min_order"),
                               "local PDE residual shrinks at second order"))
    return out


RUNNERS = {
    "wc-weak": run_wc_weak,
    "wc-full": run_wc_full,
    "wc-asym": run_wc_asym,
    "jansen-rit": run_jansen_rit,
    "arm": run_arm,
    "if-leaky": run_if,
    "if-izhikevich": run_if,
    "kernel-fourier": run_kernel_fourier,
    "kernel-pde": run_kernel_pde,
}
