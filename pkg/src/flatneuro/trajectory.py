"""Reference trajectories with exact derivatives, periodicity checks and
Bernstein-hull positivity bounds for piecewise polynomials."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Mapping

import numpy as np
from scipy.interpolate import BPoly, BSpline, PPoly
from scipy.special import comb

from . import jets
from .errors import ConfigurationError
from .jets import Jet

__all__ = [
    "Family",
    "RefTrajectory",
    "eval_ref",
    "constant",
    "line",
    "tanh_step",
    "tanh_of_line",
    "sinusoid_sum",
    "random_sinusoid_sum",
    "PolySpline",
    "random_spline",
    "check_cyclic",
    "spline_lower_bound",
    "certify_positive",
    "cyclic_defect",
    "fit_amplitude",
]


class Family(str, Enum):
    CONSTANT = "Constant"
    LINE = "Line"
    TANH_STEP = "TanhStep"
    TANH_OF_LINE = "TanhOfLine"
    SINUSOID_SUM = "SinusoidSum"
    POLY_SPLINE = "PolySpline"


_PARAMS = {
    Family.CONSTANT: ("c",),
    Family.LINE: ("v0", "slope"),
    Family.TANH_STEP: ("lo", "hi", "gamma", "t0"),
    # y(t) = yi + (yf - yi)/2 [1 + tanh(gamma (x(t) - x0))], x(t) = xi + (xf - xi) t / T
    Family.TANH_OF_LINE: ("xi", "xf", "yi", "yf", "gamma", "x0", "T"),
    # offset + sum_k amps[k] sin(omegas[k] t + phases[k])
    Family.SINUSOID_SUM: ("offset", "amps", "omegas", "phases"),
    Family.POLY_SPLINE: ("spline",),
}


@dataclass(frozen=True)
class RefTrajectory:
    """A closed-form scalar signal and its time derivatives.

    Parameters
    ----------
    family : Family
    params : mapping
        Family parameters; ``SinusoidSum`` takes sequences for ``amps``,
        ``omegas`` and ``phases``, ``PolySpline`` takes a :class:`PolySpline`.
    max_order : int
        Highest derivative order callers may request.
    period : float, optional
        Declared period for cyclic references.
    """

    family: Family
    params: Mapping = field(default_factory=dict)
    max_order: int = 8
    period: float | None = None

    def __post_init__(self):
        fam = Family(self.family)
        p = dict(self.params)
        missing = set(_PARAMS[fam]) - set(p)
        extra = set(p) - set(_PARAMS[fam])
        if missing or extra:
            raise ConfigurationError(
                f"{fam.value} needs parameters {_PARAMS[fam]}, got {sorted(p)}")
        if fam is Family.SINUSOID_SUM:
            for k in ("amps", "omegas", "phases"):
                p[k] = tuple(float(v) for v in np.atleast_1d(p[k]))
            if not len(p["amps"]) == len(p["omegas"]) == len(p["phases"]):
                raise ConfigurationError("amps, omegas and phases must have equal length")
            p["offset"] = float(p["offset"])
        elif fam is not Family.POLY_SPLINE:
            p = {k: float(v) for k, v in p.items()}
            if fam is Family.TANH_OF_LINE and not p["T"] > 0:
                raise ConfigurationError("TanhOfLine needs T > 0")
        if self.max_order < 0:
            raise ConfigurationError("max_order must be >= 0")
        if self.period is not None and not self.period > 0:
            raise ConfigurationError("period must be > 0")
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "params", MappingProxyType(p))

    def derivs(self, t, order):
        """Array ``[r(t), r'(t), ..., r^(order)(t)]`` of shape ``(order+1,) + t.shape``."""
        if order > self.max_order:
            raise ConfigurationError(
                f"derivative order {order} exceeds max_order={self.max_order}")
        t = np.asarray(t, dtype=float)
        p = self.params
        f = self.family
        if f is Family.SINUSOID_SUM:
            out = np.zeros((order + 1,) + t.shape)
            out[0] += p["offset"]
            for a, w, ph in zip(p["amps"], p["omegas"], p["phases"]):
                for k in range(order + 1):
                    out[k] += a * w ** k * np.sin(w * t + ph + k * math.pi / 2)
            return out
        if f is Family.POLY_SPLINE:
            return p["spline"].derivs(t, order)
        return np.broadcast_to(self._formula(Jet.variable(t, order)).derivatives(),
                               (order + 1,) + t.shape).copy()

    def _formula(self, t):
        p = self.params
        f = self.family
        if f is Family.CONSTANT:
            return 0.0 * t + p["c"]
        if f is Family.LINE:
            return p["v0"] + p["slope"] * t
        if f is Family.TANH_STEP:
            return p["lo"] + 0.5 * (p["hi"] - p["lo"]) * (1.0 + jets.tanh(p["gamma"] * (t - p["t0"])))
        if f is Family.TANH_OF_LINE:
            x = p["xi"] + (p["xf"] - p["xi"]) * t / p["T"]
            return p["yi"] + 0.5 * (p["yf"] - p["yi"]) * (1.0 + jets.tanh(p["gamma"] * (x - p["x0"])))
        raise AssertionError(f)  # pragma: no cover

    def jet(self, t, order):
        return Jet.from_derivatives(self.derivs(t, order))

    def rescaled(self, factor, offset=None):
        """Sinusoid sum with amplitudes multiplied by ``factor`` (and a new offset)."""
        if self.family is not Family.SINUSOID_SUM:
            raise ConfigurationError("only sinusoid sums can be rescaled")
        p = dict(self.params)
        p["amps"] = tuple(factor * a for a in p["amps"])
        if offset is not None:
            p["offset"] = offset
        return RefTrajectory(self.family, p, self.max_order, self.period)

    def __call__(self, t, order=0):
        return eval_ref(self, t, order)


def eval_ref(r: RefTrajectory, t, order: int = 0):
    """The ``order``-th time derivative of ``r`` at ``t``."""
    out = r.derivs(t, order)[order]
    return out[()] if out.ndim == 0 else out


def constant(c, max_order=8):
    return RefTrajectory(Family.CONSTANT, {"c": c}, max_order)


def line(v0, slope, max_order=8):
    return RefTrajectory(Family.LINE, {"v0": v0, "slope": slope}, max_order)


def tanh_step(lo, hi, gamma, t0, max_order=8):
    return RefTrajectory(Family.TANH_STEP, {"lo": lo, "hi": hi, "gamma": gamma, "t0": t0},
                         max_order)


def tanh_of_line(xi, xf, yi, yf, gamma, x0, T, max_order=8):
    return RefTrajectory(Family.TANH_OF_LINE, dict(xi=xi, xf=xf, yi=yi, yf=yf, gamma=gamma,
                                                   x0=x0, T=T), max_order)


def sinusoid_sum(offset, amps, omegas, phases=None, period=None, max_order=12):
    amps = np.atleast_1d(amps)
    if phases is None:
        phases = np.zeros_like(amps, dtype=float)
    return RefTrajectory(Family.SINUSOID_SUM,
                         {"offset": offset, "amps": amps, "omegas": omegas, "phases": phases},
                         max_order, period)


def random_sinusoid_sum(rng, offset, amplitude, n_terms=5, period=2 * math.pi, max_order=12):
    """Band-limited periodic signal: harmonics 1..n_terms of ``2 pi / period``.

    Amplitudes are drawn uniformly and normalized so that the sum of their
    magnitudes equals ``amplitude``; the signal therefore stays within
    ``offset +- amplitude``.
    """
    a = rng.uniform(0.2, 1.0, n_terms)
    a *= amplitude / a.sum()
    w = 2 * math.pi / period * np.arange(1, n_terms + 1)
    ph = rng.uniform(0.0, 2 * math.pi, n_terms)
    return sinusoid_sum(offset, a, w, ph, period=period, max_order=max_order)


# ---------------------------------------------------------------------------
# piecewise Bernstein polynomials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolySpline:
    """Piecewise polynomial in Bernstein (Bezier) form.

    ``coeffs[i, j]`` is the ``i``-th control value of segment ``j`` between
    ``knots[j]`` and ``knots[j+1]``.
    """

    knots: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.ndim == 1:
            coeffs = coeffs[:, None]
        if knots.ndim != 1 or knots.size != coeffs.shape[1] + 1:
            raise ConfigurationError("need one more knot than segments")
        if np.any(np.diff(knots) <= 0):
            raise ConfigurationError("knots must be strictly increasing")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self):
        return self.coeffs.shape[0] - 1

    @property
    def bpoly(self):
        return BPoly(self.coeffs, self.knots, extrapolate=False)

    @classmethod
    def from_bpoly(cls, bp):
        return cls(bp.x, bp.c)

    def __call__(self, t, nu=0):
        return self.bpoly(t, nu)

    def derivs(self, t, order):
        bp = self.bpoly
        return np.stack([bp(t, k) if k <= self.degree else np.zeros(np.shape(t))
                         for k in range(order + 1)])

    def derivative(self):
        if self.degree == 0:
            return PolySpline(self.knots, np.zeros_like(self.coeffs))
        return PolySpline.from_bpoly(self.bpoly.derivative())

    def elevate(self, times=1):
        """Same polynomial with the degree raised by ``times``."""
        c = self.coeffs
        for _ in range(times):
            n = c.shape[0] - 1
            i = np.arange(n + 2)[:, None] / (n + 1)
            up = np.zeros((n + 2,) + c.shape[1:])
            up[1:] += i[1:] * c
            up[:-1] += (1 - i[:-1]) * c
            c = up
        return PolySpline(self.knots, c)

    def _match(self, other):
        if isinstance(other, PolySpline):
            if not np.array_equal(self.knots, other.knots):
                raise ConfigurationError("splines must share knots")
            a, b = self, other
            if a.degree < b.degree:
                a = a.elevate(b.degree - a.degree)
            elif b.degree < a.degree:
                b = b.elevate(a.degree - b.degree)
            return a, b
        return self, PolySpline(self.knots, np.full_like(self.coeffs, float(other)))

    def __add__(self, other):
        a, b = self._match(other)
        return PolySpline(a.knots, a.coeffs + b.coeffs)

    __radd__ = __add__

    def __neg__(self):
        return PolySpline(self.knots, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, PolySpline):
            return PolySpline(self.knots, self.coeffs * float(other))
        if not np.array_equal(self.knots, other.knots):
            raise ConfigurationError("splines must share knots")
        m, n = self.degree, other.degree
        c = np.zeros((m + n + 1, self.coeffs.shape[1]))
        for i in range(m + 1):
            for j in range(n + 1):
                c[i + j] += comb(m, i) * comb(n, j) * self.coeffs[i] * other.coeffs[j]
        c /= comb(m + n, np.arange(m + n + 1))[:, None]
        return PolySpline(self.knots, c)

    __rmul__ = __mul__

    def __pow__(self, k):
        k = int(k)
        if k < 0:
            raise ConfigurationError("only non-negative integer powers")
        out = PolySpline(self.knots, np.ones((1, self.coeffs.shape[1])))
        for _ in range(k):
            out = out * self
        return out


def random_spline(rng, n_segments=6, degree=3, t_span=(0.0, 1.0), scale=1.0, offset=0.0):
    """Random C^{degree-1} spline on a uniform knot vector, in Bernstein form."""
    t0, t1 = t_span
    inner = np.linspace(t0, t1, n_segments + 1)
    knots = np.concatenate([[t0] * degree, inner, [t1] * degree])
    coef = offset + scale * rng.standard_normal(len(knots) - degree - 1)
    pp = PPoly.from_spline(BSpline(knots, coef, degree))
    bp = BPoly.from_power_basis(pp)
    # drop the zero-length segments introduced by repeated end knots
    keep = np.diff(bp.x) > 0
    x = np.concatenate([bp.x[:-1][keep], [bp.x[-1]]])
    return PolySpline(x, bp.c[:, keep])


def spline_lower_bound(s: PolySpline, elevate: int = 0) -> float:
    """Smallest control value, a guaranteed lower bound on ``min_t s(t)``.

    ``elevate`` raises the degree first, which can only tighten the bound.
    A positive result certifies ``s > 0`` on the whole span; a non-positive
    result proves nothing.
    """
    if elevate:
        s = s.elevate(elevate)
    return float(np.min(s.coeffs))


def certify_positive(s: PolySpline, elevate: int = 0) -> bool:
    return spline_lower_bound(s, elevate) > 0


# ---------------------------------------------------------------------------
# periodicity
# ---------------------------------------------------------------------------

def check_cyclic(times, values, period, tol):
    """Whether ``max |z(t) - z(t - period)| <= tol`` over the overlap.

    ``times`` must be strictly increasing and span at least two periods.  When
    the period is an integer number of uniform steps the comparison is
    sample-by-sample; otherwise ``z(t - period)`` is linearly interpolated.
    """
    return cyclic_defect(times, values, period) <= tol


def cyclic_defect(times, values, period):
    t = np.asarray(times, dtype=float)
    z = np.asarray(values, dtype=float)
    if not period > 0:
        raise ConfigurationError("period must be > 0")
    if t[-1] - t[0] < 2 * period - 1e-12 * max(1.0, period):
        raise ConfigurationError("signal must span at least two periods")
    dt = np.diff(t)
    if np.allclose(dt, dt[0], rtol=1e-12, atol=0):
        shift = period / dt[0]
        k = int(round(shift))
        if abs(shift - k) < 1e-9:
            return float(np.max(np.abs(z[k:] - z[:-k])))
    mask = t >= t[0] + period
    lagged = np.interp(t[mask] - period, t, z)
    return float(np.max(np.abs(z[mask] - lagged)))


def fit_amplitude(build, feasible, hi, iters=40):
    """Largest amplitude in ``(0, hi]`` for which ``feasible(build(amp))`` holds.

    Bisection, assuming feasibility is monotone in the amplitude.  Raises
    ``ConfigurationError`` when even a vanishing amplitude is infeasible.
    """
    if feasible(build(hi)):
        return hi
    lo = 0.0
    if not feasible(build(hi * 1e-9)):
        raise ConfigurationError("no feasible amplitude: the offset itself violates the bounds")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if feasible(build(mid)):
            lo = mid
        else:
            hi = mid
    return lo
