"""Neural-field interaction kernels: values, Fourier transforms, point-kernel
reductions and the single-exponential field.

Fourier transforms use ``W(zeta) = int w(x) exp(-j zeta x) dx`` (no 2 pi
factor).  Single- and multi-exponential kernels are one-sided in space,
``w(x) = exp(-a x) H(x)``; every other function kernel is even.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Callable, Mapping

import numpy as np
from scipy import integrate as spi

from . import _kernels
from . import sigmoids as sg
from .errors import ConfigurationError, NumericalError, UnsupportedOperation
from .integrate import SimResult

__all__ = [
    "Kind",
    "KernelSpec",
    "FieldParams",
    "eval_kernel",
    "fourier_closed_form",
    "fourier_numeric",
    "sine_transform",
    "default_truncation",
    "tail_mass",
    "conformance_table",
    "dirac_reduce",
    "exp_field_rhs",
    "simulate_exp_field",
    "exp_kernel_pde_residual",
    "refinement_study",
]


class Kind(str, Enum):
    DIRAC_ORIGIN = "DiracOrigin"
    DIRAC_SHIFTED = "DiracShifted"
    DIRAC_SUM = "DiracSum"
    SINGLE_EXP = "SingleExp"
    MULTI_EXP = "MultiExp"
    GAUSSIAN = "Gaussian"
    ABS_EXP = "AbsExp"
    DECAYING_OSC = "DecayingOsc"
    FLAT_HAT = "FlatHat"
    MEXICAN_HAT = "MexicanHat"
    WIZARD_HAT = "WizardHat"


DIRAC_KINDS = frozenset({Kind.DIRAC_ORIGIN, Kind.DIRAC_SHIFTED, Kind.DIRAC_SUM})
ONE_SIDED = frozenset({Kind.SINGLE_EXP, Kind.MULTI_EXP})
# kinds whose tabulated transform is exact
VERIFIED = (Kind.ABS_EXP, Kind.DECAYING_OSC, Kind.WIZARD_HAT, Kind.DIRAC_ORIGIN,
            Kind.DIRAC_SHIFTED, Kind.DIRAC_SUM, Kind.FLAT_HAT)
# kinds whose tabulated transform is known to be off; reported only
REPORTED = (Kind.GAUSSIAN, Kind.MEXICAN_HAT)

_DEFAULTS = {
    Kind.DIRAC_ORIGIN: {},
    Kind.DIRAC_SHIFTED: {"x0": 0.5},
    Kind.DIRAC_SUM: {"weights": (0.5, 0.25), "positions": (-0.5, 1.0)},
    Kind.SINGLE_EXP: {"a": 1.0},
    Kind.MULTI_EXP: {"rates": (1.0, 3.0)},
    Kind.GAUSSIAN: {"sigma": 1.0},
    Kind.ABS_EXP: {"a": 1.0},
    Kind.DECAYING_OSC: {"b": 1.0},
    Kind.FLAT_HAT: {"chi": 1.0},
    Kind.MEXICAN_HAT: {"Gamma1": 2.0, "gamma1": 2.0, "Gamma2": 1.0, "gamma2": 0.5},
    Kind.WIZARD_HAT: {},
}
_POSITIVE = {"a", "sigma", "b", "chi", "gamma1", "gamma2", "Gamma1", "Gamma2"}
_SEQUENCES = {"weights", "positions", "rates"}


@dataclass(frozen=True)
class KernelSpec:
    kind: Kind
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        kind = Kind(self.kind)
        merged = dict(_DEFAULTS[kind])
        for k, v in dict(self.params).items():
            if k not in merged:
                raise ConfigurationError(f"{kind.value} has no parameter {k!r}")
            merged[k] = v
        for k, v in merged.items():
            if k in _SEQUENCES:
                v = tuple(float(x) for x in np.atleast_1d(v))
                if not all(math.isfinite(x) for x in v):
                    raise ConfigurationError(f"{kind.value}: {k} must be finite")
                if k == "rates" and not all(x > 0 for x in v):
                    raise ConfigurationError("MultiExp rates must be > 0")
            else:
                v = float(v)
                if not math.isfinite(v) or (k in _POSITIVE and not v > 0):
                    raise ConfigurationError(f"{kind.value}: parameter {k} must be positive "
                                             f"and finite, got {v}")
            merged[k] = v
        if kind is Kind.DIRAC_SUM and len(merged["weights"]) != len(merged["positions"]):
            raise ConfigurationError("DiracSum needs as many weights as positions")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "params", MappingProxyType(merged))

    def __hash__(self):
        return hash((self.kind, tuple(sorted(self.params.items()))))

    @property
    def is_dirac(self):
        return self.kind in DIRAC_KINDS


def eval_kernel(k: KernelSpec, x):
    """Kernel value ``w(x)``; Dirac kinds raise ``UnsupportedOperation``."""
    if k.is_dirac:
        raise UnsupportedOperation(f"{k.kind.value} is a distribution; use dirac_reduce")
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    p = k.params
    if k.kind is Kind.SINGLE_EXP:
        out = np.where(x >= 0, np.exp(-p["a"] * np.maximum(x, 0.0)), 0.0)
    elif k.kind is Kind.MULTI_EXP:
        xp = np.maximum(x, 0.0)
        out = np.where(x >= 0, sum(np.exp(-a * xp) for a in p["rates"]), 0.0)
    elif k.kind is Kind.GAUSSIAN:
        out = np.exp(-x * x / p["sigma"] ** 2)
    elif k.kind is Kind.ABS_EXP:
        out = np.exp(-p["a"] * ax)
    elif k.kind is Kind.DECAYING_OSC:
        b = p["b"]
        out = np.exp(-b * ax) * (b * np.sin(ax) + np.cos(x))
    elif k.kind is Kind.FLAT_HAT:
        out = np.where(ax <= 0.5 * p["chi"], 1.0, 0.0)
    elif k.kind is Kind.MEXICAN_HAT:
        out = p["Gamma1"] * np.exp(-p["gamma1"] * ax) - p["Gamma2"] * np.exp(-p["gamma2"] * ax)
    elif k.kind is Kind.WIZARD_HAT:
        out = 0.25 * (1.0 - ax) * np.exp(-ax)
    else:  # pragma: no cover
        raise UnsupportedOperation(k.kind)
    return out[()] if out.ndim == 0 else out


def fourier_closed_form(k: KernelSpec, zeta):
    """Tabulated transform at ``zeta``.

    Dirac kinds give complex values.  The Gaussian and Mexican-hat entries
    are returned as tabulated even though they do not match the integral;
    :func:`conformance_table` reports the gap.
    """
    z = np.asarray(zeta, dtype=float)
    p = k.params
    if k.kind is Kind.DIRAC_ORIGIN:
        out = np.ones_like(z) + 0j
    elif k.kind is Kind.DIRAC_SHIFTED:
        out = np.exp(-1j * z * p["x0"])
    elif k.kind is Kind.DIRAC_SUM:
        out = sum(a * np.exp(-1j * z * x) for a, x in zip(p["weights"], p["positions"]))
    elif k.kind is Kind.FLAT_HAT:
        chi = p["chi"]
        out = chi * np.sinc(chi * z / (2 * np.pi))  # numpy sinc is sin(pi u)/(pi u)
    elif k.kind is Kind.GAUSSIAN:
        s = p["sigma"]
        out = s / math.sqrt(2) * np.exp(-s * s * z * z / 4)
    elif k.kind is Kind.ABS_EXP:
        a = p["a"]
        out = 2 * a / (a * a + z * z)
    elif k.kind is Kind.DECAYING_OSC:
        b = p["b"]
        out = 4 * b * (b * b + 1) / (z ** 4 + 2 * (b * b - 1) * z * z + (b * b + 1) ** 2)
    elif k.kind is Kind.MEXICAN_HAT:
        G1, g1, G2, g2 = p["Gamma1"], p["gamma1"], p["Gamma2"], p["gamma2"]
        out = 2 * (G1 * g1 * (g2 + z * z) - G2 * g2 * (g1 * g1 + z * z)) / (
            (g1 * g1 + z * z) * (g2 * g2 + z * z))
    elif k.kind is Kind.WIZARD_HAT:
        out = z * z / (1 + z * z) ** 2
    else:
        raise UnsupportedOperation(f"no tabulated transform for {k.kind.value}")
    return out[()] if np.ndim(out) == 0 else out


def exact_transform(k: KernelSpec, zeta):
    """Correct closed form for the two kinds whose tabulated entry is off."""
    z = np.asarray(zeta, dtype=float)
    p = k.params
    if k.kind is Kind.GAUSSIAN:
        s = p["sigma"]
        return s * math.sqrt(math.pi) * np.exp(-s * s * z * z / 4)
    if k.kind is Kind.MEXICAN_HAT:
        G1, g1, G2, g2 = p["Gamma1"], p["gamma1"], p["Gamma2"], p["gamma2"]
        return 2 * G1 * g1 / (g1 * g1 + z * z) - 2 * G2 * g2 / (g2 * g2 + z * z)
    return fourier_closed_form(k, zeta)


def default_truncation(k: KernelSpec):
    """Half-width ``L`` beyond which the kernel mass is negligible (< 1e-10)."""
    p = k.params
    if k.kind in (Kind.ABS_EXP, Kind.SINGLE_EXP):
        return 40.0 / p["a"]
    if k.kind is Kind.MULTI_EXP:
        return 40.0 / min(p["rates"])
    if k.kind is Kind.GAUSSIAN:
        return 8.0 * p["sigma"]
    if k.kind is Kind.DECAYING_OSC:
        return 45.0 / p["b"]
    if k.kind is Kind.FLAT_HAT:
        return 0.5 * p["chi"]
    if k.kind is Kind.MEXICAN_HAT:
        return 45.0 / min(p["gamma1"], p["gamma2"])
    if k.kind is Kind.WIZARD_HAT:
        return 45.0
    if k.kind is Kind.DIRAC_ORIGIN:
        return 1.0
    if k.kind is Kind.DIRAC_SHIFTED:
        return abs(p["x0"]) + 1.0
    if k.kind is Kind.DIRAC_SUM:
        return max(abs(x) for x in p["positions"]) + 1.0
    raise UnsupportedOperation(k.kind)  # pragma: no cover


def _breakpoints(k, L):
    pts = [-L, 0.0, L]
    if k.kind is Kind.FLAT_HAT:
        h = 0.5 * k.params["chi"]
        pts = [-h, 0.0, h]
    return sorted(set(pts))


def _weighted(k, zeta, L, weight, epsabs):
    f = lambda x: float(eval_kernel(k, x))  # noqa: E731
    pts = _breakpoints(k, L)
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        if k.kind in ONE_SIDED and hi <= 0:
            continue
        val, err = spi.quad(f, lo, hi, weight=weight, wvar=float(zeta), epsabs=epsabs,
                            epsrel=0.0, limit=400)
        if not err <= 10 * epsabs:
            raise NumericalError(f"quadrature for {k.kind.value} at zeta={zeta} did not "
                                 f"converge (error estimate {err:.2g})")
        total += val
    return total


DIRAC_MOLLIFIER = 1e-4


def fourier_numeric(k: KernelSpec, zeta: float, truncation: float | None = None,
                    epsabs: float = 1e-10):
    """Transform by adaptive quadrature over ``[-L, L]``.

    Returns a complex number; for even kernels the imaginary part is zero up
    to quadrature error.  Dirac kinds are replaced by Gaussian bumps of width
    ``DIRAC_MOLLIFIER``, which changes the transform by a factor
    ``exp(-(eps zeta)^2 / 4)``.
    """
    zeta = float(zeta)
    if k.is_dirac:
        return complex(_dirac_numeric(k, zeta))
    L = default_truncation(k) if truncation is None else float(truncation)
    if not L > 0:
        raise ConfigurationError("truncation must be > 0")
    re = _weighted(k, zeta, L, "cos", epsabs)
    im = -_weighted(k, zeta, L, "sin", epsabs) if zeta != 0.0 else 0.0
    return complex(re, im)


def _dirac_numeric(k, zeta):
    eps = DIRAC_MOLLIFIER
    p = k.params
    if k.kind is Kind.DIRAC_ORIGIN:
        terms = [(1.0, 0.0)]
    elif k.kind is Kind.DIRAC_SHIFTED:
        terms = [(1.0, p["x0"])]
    else:
        terms = list(zip(p["weights"], p["positions"]))
    total = 0j
    norm = 1.0 / (eps * math.sqrt(math.pi))
    for a, x0 in terms:
        bump = lambda x, x0=x0: norm * math.exp(-((x - x0) / eps) ** 2)  # noqa: E731
        lo, hi = x0 - 12 * eps, x0 + 12 * eps
        re = spi.quad(lambda x: bump(x) * math.cos(zeta * x), lo, hi, epsabs=1e-12, limit=200)[0]
        im = -spi.quad(lambda x: bump(x) * math.sin(zeta * x), lo, hi, epsabs=1e-12, limit=200)[0]
        total += a * complex(re, im)
    return total


def sine_transform(k: KernelSpec, zeta, truncation=None, epsabs=1e-12):
    """``int w(x) sin(zeta x) dx``; zero for an even kernel."""
    L = default_truncation(k) if truncation is None else truncation
    return _weighted(k, zeta, L, "sin", epsabs)


def tail_mass(k: KernelSpec, truncation=None):
    """``int_{|x| > L} |w(x)| dx`` (one side for one-sided kernels)."""
    L = default_truncation(k) if truncation is None else truncation
    f = lambda x: abs(float(eval_kernel(k, x)))  # noqa: E731
    right = spi.quad(f, L, np.inf, limit=400, epsabs=1e-14)[0]
    if k.kind in ONE_SIDED:
        return right
    return right + spi.quad(f, -np.inf, -L, limit=400, epsabs=1e-14)[0]


def conformance_table(zetas=(0.0, 0.5, 1.0, 2.0, 5.0), kernels=None):
    """Rows ``(kernel, zeta, closed_form, numeric, abs_diff, status)``.

    ``status`` is ``"verified"`` for kinds whose tabulated transform is
    expected to be exact and ``"reported"`` for the Gaussian and Mexican hat.
    Complex values are returned as Python complex numbers.
    """
    if kernels is None:
        kernels = [KernelSpec(kd) for kd in VERIFIED + REPORTED]
    rows = []
    for k in kernels:
        status = "reported" if k.kind in REPORTED else "verified"
        for z in zetas:
            cf = complex(fourier_closed_form(k, z))
            nu = fourier_numeric(k, z)
            rows.append((k.kind.value, float(z), cf, nu, abs(cf - nu), status))
    return rows


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldParams:
    """One-dimensional field ``tau dv/dt = -v + I_r (w * F(v)) h(v) + u`` on ``[lo, hi]``.

    ``F=None`` makes the coupling linear in ``v``, which is the case the
    point-kernel and exponential-kernel reductions use.  ``saturating``
    switches ``h(v) = 1 - v`` on.
    """

    tau_sy: float = 1.0
    I_r: float = 1.0
    lo: float = 0.0
    hi: float = 1.0
    F: sg.SigmoidSpec | None = None
    saturating: bool = False

    def __post_init__(self):
        if not self.tau_sy > 0:
            raise ConfigurationError("tau_sy must be > 0")
        if not self.hi > self.lo:
            raise ConfigurationError("field domain needs hi > lo")

    def rate(self, v):
        return v if self.F is None else sg.evaluate(self.F, v)

    def gain(self, v):
        return 1.0 - v if self.saturating else 1.0


def dirac_reduce(f: FieldParams, k: KernelSpec, r) -> Callable:
    """Pointwise right-hand side for a Dirac kernel on the grid ``r``.

    Returns ``rhs(v, u)`` giving ``dv/dt`` at each grid point.  With the shift
    ``r0`` (zero for the origin) the coupling reads
    ``1_[lo,hi](r - r0) v(r - r0)``; the shifted value is linearly
    interpolated on the grid.
    """
    if k.kind is Kind.DIRAC_ORIGIN:
        r0 = 0.0
    elif k.kind is Kind.DIRAC_SHIFTED:
        r0 = k.params["x0"]
        if not f.lo <= r0 <= f.hi:
            raise ConfigurationError(f"shift {r0} lies outside the field domain "
                                     f"[{f.lo}, {f.hi}]")
    else:
        raise UnsupportedOperation("dirac_reduce handles the origin and shifted Dirac kernels")
    r = np.asarray(r, dtype=float)
    src = r - r0
    inside = (src >= f.lo - 1e-12) & (src <= f.hi + 1e-12)

    def rhs(v, u):
        v = np.asarray(v, dtype=float)
        shifted = np.where(inside, np.interp(src, r, f.rate(v), left=0.0, right=0.0), 0.0)
        return (-v + f.I_r * shifted * f.gain(v) + u) / f.tau_sy

    return rhs


def exp_field_rhs(f: FieldParams, a: float, r):
    """Right-hand side for the one-sided exponential kernel ``exp(-a x) H(x)``.

    The convolution ``int_lo^r exp(-a (r - s)) F(v(s)) ds`` is evaluated with
    the trapezoid rule through an O(N) recursion.
    """
    r = np.asarray(r, dtype=float)
    dr = r[1] - r[0]

    def rhs(v, u):
        conv = _kernels.exp_conv_onesided(f.rate(v), dr, a)
        return (-v + f.I_r * conv * f.gain(v) + u) / f.tau_sy

    return rhs


def simulate_exp_field(f: FieldParams, a: float, n_r: int, t_end: float, dt: float,
                       u: Callable, v0: Callable | None = None) -> SimResult:
    """Method-of-lines RK4 solution on a uniform grid of ``n_r`` points.

    ``u(t, r)`` and ``v0(r)`` are vectorized in ``r``.  States are the field
    values at the grid points; the grid is stored in ``channels["r"]``.
    """
    r = np.linspace(f.lo, f.hi, n_r)
    rhs = exp_field_rhs(f, a, r)
    n = int(round(t_end / dt))
    if abs(n * dt - t_end) > 1e-9 * t_end:
        raise ConfigurationError("t_end must be a multiple of dt")
    times = dt * np.arange(n + 1)
    vs = np.empty((n + 1, n_r))
    v = np.zeros(n_r) if v0 is None else np.asarray(v0(r), dtype=float)
    vs[0] = v
    for i in range(n):
        t = times[i]
        k1 = rhs(v, u(t, r))
        k2 = rhs(v + dt / 2 * k1, u(t + dt / 2, r))
        k3 = rhs(v + dt / 2 * k2, u(t + dt / 2, r))
        k4 = rhs(v + dt * k3, u(t + dt, r))
        v = v + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        vs[i + 1] = v
    res = SimResult(times, vs, tuple(f"v{j}" for j in range(n_r)))
    res.channels["r"] = np.broadcast_to(r, vs.shape)
    return res


def exp_kernel_pde_residual(f: FieldParams, a: float, v, u, dt: float, dr: float):
    """Finite-difference residual of the local PDE obeyed by the exponential field.

    With ``c = int_lo^r exp(-a (r - s)) v(s) ds`` one has ``c_r = v - a c``;
    eliminating ``c`` between the field equation and its ``r`` derivative
    gives::

        tau v_tr = -(a tau d_t + d_r + a) v + (d_r + a) u + I_r v

    ``v`` and ``u`` are ``(n_t, n_r)`` samples.  Returns the residual at the
    interior points ``[1:-1, 1:-1]`` using second-order central differences.
    Only the linear field (``F=None``, no saturation) satisfies this PDE.
    """
    if f.F is not None or f.saturating:
        raise UnsupportedOperation("the local PDE holds for the linear, non-saturating field")
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    tau = f.tau_sy
    v_t = (v[2:, 1:-1] - v[:-2, 1:-1]) / (2 * dt)
    v_r = (v[1:-1, 2:] - v[1:-1, :-2]) / (2 * dr)
    u_r = (u[1:-1, 2:] - u[1:-1, :-2]) / (2 * dr)
    v_tr = (v[2:, 2:] - v[2:, :-2] - v[:-2, 2:] + v[:-2, :-2]) / (4 * dt * dr)
    vc = v[1:-1, 1:-1]
    uc = u[1:-1, 1:-1]
    return tau * v_tr + a * tau * v_t + v_r + a * vc - u_r - a * uc - f.I_r * vc


def refinement_study(f: FieldParams, a: float, u: Callable, t_end: float = 0.5,
                     levels=(40, 80, 160), courant: float = 1.0, r_probe=(0.25, 0.75),
                     v0: Callable | None = None):
    """Residual norms and observed orders under simultaneous ``(dt, dr)`` halving.

    The residual is compared on the fixed probe box ``r in r_probe`` (away
    from the left boundary, where the kernel support starts) for all times
    after the first step.  Returns ``(hs, norms, orders)``.
    """
    norms = []
    hs = []
    for m in levels:
        n_r = m + 1
        dr = (f.hi - f.lo) / m
        dt = courant * dr
        steps = int(round(t_end / dt))
        sim = simulate_exp_field(f, a, n_r, steps * dt, dt, u, v0)
        r = np.linspace(f.lo, f.hi, n_r)
        uu = np.stack([u(t, r) for t in sim.times])
        res = exp_kernel_pde_residual(f, a, sim.states, uu, dt, dr)
        ri = r[1:-1]
        box = (ri >= r_probe[0] - 1e-12) & (ri <= r_probe[1] + 1e-12)
        norms.append(float(np.max(np.abs(res[:, box]))))
        hs.append(dr)
    norms = np.array(norms)
    with np.errstate(divide="ignore"):
        orders = np.log(norms[:-1] / norms[1:]) / np.log(np.array(hs[:-1]) / np.array(hs[1:]))
    if not np.all(np.isfinite(norms)):
        raise NumericalError("non-finite residual in refinement study")
    return np.array(hs), norms, orders
