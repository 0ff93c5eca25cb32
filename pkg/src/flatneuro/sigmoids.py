"""Firing-rate nonlinearities: values, slopes and inverses.

Every family is a :class:`SigmoidSpec` (immutable) and is evaluated through
the module functions :func:`evaluate`, :func:`deriv` and :func:`inverse`.
All three accept floats, numpy arrays and :class:`~flatneuro.jets.Jet`
objects; the jet path is what the flatness chains use to get exact higher
derivatives of ``F`` and ``F^{-1}``.

Several textbook formulas are corrected here (see the README):

* logistic slope is ``beta F (1 - F)`` and its inverse
  ``v_T + ln(y / (1 - y)) / beta``;
* Naka-Rushton is non-zero for positive stimulus;
* the piecewise-linear rate saturates at 1 past ``xi0 + 1/beta``;
* the noisy rate uses ``1 - exp(-(xi - xi_T)/beta)`` in the denominator.

No inverse clamps its argument: values on or outside the range boundary raise
:class:`~flatneuro.errors.DomainError`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Mapping

import numpy as np
from scipy.optimize import brentq

from . import jets
from .errors import ConfigurationError, DomainError, UnsupportedOperation
from .jets import Jet

__all__ = [
    "Family",
    "SigmoidSpec",
    "evaluate",
    "deriv",
    "inverse",
    "inverse_deriv",
    "value_range",
    "logistic",
    "heaviside",
]


class Family(str, Enum):
    HEAVISIDE = "Heaviside"
    PIECEWISE_LINEAR = "PiecewiseLinear"
    LOGISTIC = "Logistic"
    TRAUB = "Traub"
    TANH = "Tanh"
    SQUARE_ROOT = "SquareRoot"
    NOISY_RATE = "NoisyRate"
    FLEXIBLE_SHAPE = "FlexibleShape"
    NAKA_RUSHTON = "NakaRushton"
    ALGEBRAIC = "Algebraic"


_DEFAULTS = {
    Family.HEAVISIDE: {"F0": 1.0, "xi0": 0.0},
    Family.PIECEWISE_LINEAR: {"beta": 1.0, "xi0": 0.0},
    Family.LOGISTIC: {"beta": 1.0, "vT": 0.0},
    Family.TRAUB: {"alpha": 1.0, "beta": 0.0},
    Family.TANH: {"F0": 0.5, "alpha": 1.0},
    Family.SQUARE_ROOT: {"F0": 1.0, "xiT": 0.0},
    Family.NOISY_RATE: {"beta": 1.0, "xiT": 0.0},
    Family.FLEXIBLE_SHAPE: {"Fm": 1.0, "mu": 0.0, "sigma": 1.0, "kappa": 1.0},
    Family.NAKA_RUSHTON: {"r": 1.0, "theta": 1.0, "n": 2.0},
    Family.ALGEBRAIC: {},
}

# parameters that must be strictly positive, per family
_POSITIVE = {
    Family.HEAVISIDE: ("F0",),
    Family.PIECEWISE_LINEAR: ("beta",),
    Family.LOGISTIC: ("beta",),
    Family.TRAUB: ("alpha",),
    Family.TANH: ("F0", "alpha"),
    Family.SQUARE_ROOT: ("F0",),
    Family.NOISY_RATE: ("beta",),
    Family.FLEXIBLE_SHAPE: ("Fm", "sigma", "kappa"),
    Family.NAKA_RUSHTON: ("r", "theta", "n"),
    Family.ALGEBRAIC: (),
}

MONOTONE = frozenset({Family.LOGISTIC, Family.TANH, Family.TRAUB, Family.ALGEBRAIC,
                      Family.FLEXIBLE_SHAPE, Family.NOISY_RATE})
INVERTIBLE = frozenset(Family) - {Family.HEAVISIDE}


@dataclass(frozen=True)
class SigmoidSpec:
    """A firing-rate family with its named parameters.

    Unspecified parameters take the family defaults.  Unknown names and
    non-positive scale/steepness parameters raise ``ConfigurationError``.
    """

    family: Family
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        try:
            fam = Family(self.family)
        except ValueError:
            raise ConfigurationError(f"unknown sigmoid family {self.family!r}") from None
        merged = dict(_DEFAULTS[fam])
        for k, v in dict(self.params).items():
            if k not in merged:
                raise ConfigurationError(f"{fam.value} has no parameter {k!r}")
            merged[k] = float(v)
        for k in _POSITIVE[fam]:
            if not merged[k] > 0 or not math.isfinite(merged[k]):
                raise ConfigurationError(f"{fam.value}: parameter {k} must be > 0, got {merged[k]}")
        for k, v in merged.items():
            if not math.isfinite(v):
                raise ConfigurationError(f"{fam.value}: parameter {k} must be finite")
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "params", MappingProxyType(merged))

    def __getitem__(self, name):
        return self.params[name]

    def __hash__(self):
        return hash((self.family, tuple(sorted(self.params.items()))))

    def __eq__(self, other):
        if not isinstance(other, SigmoidSpec):
            return NotImplemented
        return self.family == other.family and dict(self.params) == dict(other.params)

    def to_dict(self):
        return {"family": self.family.value, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, d):
        return cls(d["family"], d.get("params", {}))

    # method sugar
    def __call__(self, x):
        return evaluate(self, x)

    def deriv(self, x):
        return deriv(self, x)

    def inverse(self, y):
        return inverse(self, y)


def logistic(beta=1.0, vT=0.0):
    return SigmoidSpec(Family.LOGISTIC, {"beta": beta, "vT": vT})


def heaviside(F0=1.0, xi0=0.0):
    return SigmoidSpec(Family.HEAVISIDE, {"F0": F0, "xi0": xi0})


def _base(x):
    return jets.value_of(x)


def _out(x):
    if isinstance(x, Jet):
        return x
    x = np.asarray(x, dtype=float)
    return x[()] if x.ndim == 0 else x


# ---------------------------------------------------------------------------
# values
# ---------------------------------------------------------------------------

def _noisy_core(z, beta):
    # z / (1 - exp(-z/beta)); removable singularity at z = 0 with value beta
    zb = _base(z)
    small = np.abs(zb) < 1e-6 * beta
    if isinstance(z, Jet):
        if np.any(small):
            # series z/(1-e^{-u beta... }) = beta (1 + u/2 + u^2/12 - u^4/720), u = z/beta
            u = z / beta
            series = beta * (1.0 + u / 2.0 + u * u / 12.0 - u * u * u * u / 720.0)
            safe = Jet(np.where(small, 1.0, zb))
            zz = jets.where(small, safe, z)
            full = zz / (1.0 - jets.exp(-zz / beta))
            return jets.where(small, series, full)
        return z / (1.0 - jets.exp(-z / beta))
    z = np.asarray(z, dtype=float)
    zs = np.where(small, 1.0, z)
    full = zs / -np.expm1(-zs / beta)
    u = z / beta
    return np.where(small, beta * (1.0 + u / 2.0 + u * u / 12.0), full)


def evaluate(spec: SigmoidSpec, x):
    """Firing rate ``F(x)``."""
    p = spec.params
    f = spec.family
    xb = _base(x)
    if f is Family.HEAVISIDE:
        if isinstance(x, Jet):
            return jets.where(xb > p["xi0"], Jet.constant(np.full(np.shape(xb), p["F0"]), x.order),
                              Jet.constant(np.zeros(np.shape(xb)), x.order))
        return _out(np.where(np.asarray(x) > p["xi0"], p["F0"], 0.0))
    if f is Family.PIECEWISE_LINEAR:
        lin = p["beta"] * (x - p["xi0"])
        lo = xb < p["xi0"]
        hi = xb >= p["xi0"] + 1.0 / p["beta"]
        return _out(jets.where(lo, 0.0 * x, jets.where(hi, 0.0 * x + 1.0, lin)))
    if f is Family.LOGISTIC:
        return _out(1.0 / (1.0 + jets.exp(-p["beta"] * (x - p["vT"]))))
    if f is Family.TRAUB:
        return _out(1.0 / (1.0 + jets.exp(-(x - p["beta"]) / p["alpha"])))
    if f is Family.TANH:
        return _out(p["F0"] * (1.0 + jets.tanh(p["alpha"] * x)))
    if f is Family.SQUARE_ROOT:
        if np.any(xb < p["xiT"]):
            raise DomainError("SquareRoot rate is undefined below xiT")
        return _out(p["F0"] * jets.sqrt(x - p["xiT"]))
    if f is Family.NOISY_RATE:
        return _out(jets.sqrt(_noisy_core(x - p["xiT"], p["beta"])))
    if f is Family.FLEXIBLE_SHAPE:
        z = math.sqrt(2.0) * (x - p["mu"]) / p["sigma"]
        return _out(p["Fm"] - p["Fm"] * jets.power(1.0 + jets.exp(z), -p["kappa"]))
    if f is Family.NAKA_RUSHTON:
        pos = xb > 0
        if isinstance(x, Jet):
            safe = jets.where(pos, x, 0.0 * x + 1.0)
        else:
            safe = np.where(pos, x, 1.0)
        xn = jets.power(safe, p["n"])
        val = p["r"] * xn / (xn + p["theta"] ** p["n"])
        return _out(jets.where(pos, val, 0.0 * safe))
    if f is Family.ALGEBRAIC:
        return _out(x / jets.sqrt(1.0 + x * x))
    raise UnsupportedOperation(f)  # pragma: no cover


# ---------------------------------------------------------------------------
# slopes
# ---------------------------------------------------------------------------

def deriv(spec: SigmoidSpec, x):
    """Analytic slope ``F'(x)``.

    Heaviside has no classical derivative and raises ``UnsupportedOperation``.
    For jets this returns the jet of ``F'(x(t))``.
    """
    p = spec.params
    f = spec.family
    if f is Family.HEAVISIDE:
        raise UnsupportedOperation("Heaviside rate has no classical derivative")
    if isinstance(x, Jet):
        # d/dx F along the identity, composed with x
        fd = _point_derivatives(spec, x.value, x.order + 1)
        return jets.compose(fd[1:], x)
    x = np.asarray(x, dtype=float)
    if f is Family.PIECEWISE_LINEAR:
        inside = (x >= p["xi0"]) & (x < p["xi0"] + 1.0 / p["beta"])
        return _out(np.where(inside, p["beta"], 0.0))
    if f is Family.LOGISTIC:
        F = evaluate(spec, x)
        return _out(p["beta"] * F * (1.0 - F))
    if f is Family.TRAUB:
        F = evaluate(spec, x)
        return _out(F * (1.0 - F) / p["alpha"])
    if f is Family.TANH:
        return _out(p["F0"] * p["alpha"] / np.cosh(p["alpha"] * x) ** 2)
    if f is Family.SQUARE_ROOT:
        if np.any(x <= p["xiT"]):
            raise DomainError("SquareRoot rate is not differentiable at or below xiT")
        return _out(0.5 * p["F0"] / np.sqrt(x - p["xiT"]))
    if f is Family.NOISY_RATE:
        return _out(_point_derivatives(spec, x, 1)[1])
    if f is Family.FLEXIBLE_SHAPE:
        z = math.sqrt(2.0) * (x - p["mu"]) / p["sigma"]
        ez = np.exp(-np.abs(z))
        # e^z (1+e^z)^(-k-1), written to avoid overflow for large |z|
        g = np.where(z > 0, ez ** p["kappa"] / (1.0 + ez) ** (p["kappa"] + 1.0),
                     ez / (1.0 + ez) ** (p["kappa"] + 1.0))
        return _out(p["Fm"] * p["kappa"] * math.sqrt(2.0) / p["sigma"] * g)
    if f is Family.NAKA_RUSHTON:
        n, th, r = p["n"], p["theta"], p["r"]
        pos = x > 0
        xs = np.where(pos, x, 1.0)
        val = r * n * th ** n * xs ** (n - 1.0) / (xs ** n + th ** n) ** 2
        return _out(np.where(pos, val, 0.0))
    if f is Family.ALGEBRAIC:
        return _out((1.0 + x * x) ** -1.5)
    raise UnsupportedOperation(f)  # pragma: no cover


def _point_derivatives(spec, x0, order):
    """``F(x0), F'(x0), ..., F^(order)(x0)`` via jet evaluation."""
    return evaluate(spec, Jet.variable(x0, order)).derivatives()


# ---------------------------------------------------------------------------
# ranges and inverses
# ---------------------------------------------------------------------------

def value_range(spec: SigmoidSpec):
    """Open interval ``(lo, hi)`` on which :func:`inverse` is defined."""
    p = spec.params
    f = spec.family
    if f is Family.HEAVISIDE:
        return (0.0, p["F0"])
    if f in (Family.PIECEWISE_LINEAR, Family.LOGISTIC, Family.TRAUB):
        return (0.0, 1.0)
    if f is Family.TANH:
        return (0.0, 2.0 * p["F0"])
    if f in (Family.SQUARE_ROOT, Family.NOISY_RATE):
        return (0.0, math.inf)
    if f is Family.FLEXIBLE_SHAPE:
        return (0.0, p["Fm"])
    if f is Family.NAKA_RUSHTON:
        return (0.0, p["r"])
    if f is Family.ALGEBRAIC:
        return (-1.0, 1.0)
    raise UnsupportedOperation(f)  # pragma: no cover


def _check_interior(spec, y, channel):
    lo, hi = value_range(spec)
    yb = _base(y)
    bad = ~((yb > lo) & (yb < hi))
    if np.any(bad):
        worst = np.asarray(yb)[bad].ravel()[0] if np.ndim(yb) else float(yb)
        raise DomainError(
            f"{spec.family.value} inverse needs an argument in the open interval "
            f"({lo}, {hi}); got {worst!r}",
            channel=channel,
        )


def inverse(spec: SigmoidSpec, y, channel=None):
    """``phi(y) = F^{-1}(y)`` for ``y`` strictly inside the range of ``F``.

    ``channel`` is attached to the ``DomainError`` to say which equation failed.
    """
    f = spec.family
    p = spec.params
    if f is Family.HEAVISIDE:
        raise UnsupportedOperation("Heaviside rate is not invertible")
    _check_interior(spec, y, channel)
    if f is Family.PIECEWISE_LINEAR:
        return _out(p["xi0"] + y / p["beta"])
    if f is Family.LOGISTIC:
        return _out(p["vT"] + jets.log(y / (1.0 - y)) / p["beta"])
    if f is Family.TRAUB:
        return _out(p["beta"] + p["alpha"] * jets.log(y / (1.0 - y)))
    if f is Family.TANH:
        # atanh(s) = ln((1+s)/(1-s))/2 with s = y/F0 - 1
        s = y / p["F0"] - 1.0
        return _out(0.5 * jets.log((1.0 + s) / (1.0 - s)) / p["alpha"])
    if f is Family.SQUARE_ROOT:
        q = y / p["F0"]
        return _out(p["xiT"] + q * q)
    if f is Family.NOISY_RATE:
        return _out(_noisy_inverse(spec, y))
    if f is Family.FLEXIBLE_SHAPE:
        w = jets.power(1.0 - y / p["Fm"], -1.0 / p["kappa"]) - 1.0
        return _out(p["mu"] + p["sigma"] * jets.log(w) / math.sqrt(2.0))
    if f is Family.NAKA_RUSHTON:
        return _out(p["theta"] * jets.power(y / (p["r"] - y), 1.0 / p["n"]))
    if f is Family.ALGEBRAIC:
        return _out(y / jets.sqrt(1.0 - y * y))
    raise UnsupportedOperation(f)  # pragma: no cover


def _noisy_inverse_scalar(spec, y):
    p = spec.params
    target = y * y
    g = lambda z: _noisy_core(z, p["beta"]) - target  # noqa: E731
    # g is increasing, g(-inf) = -target, g(+inf) = +inf
    lo, hi = -1.0, 1.0
    while g(lo) > 0:
        lo *= 2.0
    while g(hi) < 0:
        hi *= 2.0
    return p["xiT"] + brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def _noisy_inverse(spec, y):
    if isinstance(y, Jet):
        x0 = _noisy_inverse(spec, y.value)
        fd = _point_derivatives(spec, x0, y.order)
        gd = jets.revert(fd)
        gd[0] = x0
        return jets.compose(gd, y)
    yb = np.asarray(y, dtype=float)
    out = np.vectorize(lambda v: _noisy_inverse_scalar(spec, v), otypes=[float])(yb)
    return out


def inverse_deriv(spec: SigmoidSpec, y):
    """Slope of the inverse, ``phi'(y) = 1 / F'(phi(y))``."""
    return _out(1.0 / np.asarray(deriv(spec, inverse(spec, y))))
