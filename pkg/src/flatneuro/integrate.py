"""Explicit Runge-Kutta integration with fixed or adaptive steps."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, DivergenceError, FlatneuroError, StiffnessError

__all__ = ["Method", "IntegratorConfig", "SimResult", "integrate", "second_order_error"]

MIN_STEP = 1e-12


class Method(str, Enum):
    RK4_FIXED = "RK4Fixed"
    RK45_ADAPTIVE = "RK45Adaptive"


@dataclass(frozen=True)
class IntegratorConfig:
    """How to integrate over ``[t_start, t_end]``.

    The defaults are an adaptive Dormand-Prince pair with ``rel_tol=1e-3`` and
    ``abs_tol=1e-6``; ``dt`` is the step for ``RK4Fixed`` and the initial step
    guess for the adaptive method.
    """

    t_start: float = 0.0
    t_end: float = 1.0
    method: Method = Method.RK45_ADAPTIVE
    dt: float = 1e-3
    rel_tol: float = 1e-3
    abs_tol: float = 1e-6
    max_step: float = np.inf

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not self.dt > 0:
            raise ConfigurationError(f"dt must be > 0, got {self.dt}")
        if not self.rel_tol > 0 or not self.abs_tol > 0:
            raise ConfigurationError("tolerances must be > 0")
        if not self.t_end > self.t_start:
            raise ConfigurationError("t_end must exceed t_start")
        if not self.max_step > 0:
            raise ConfigurationError("max_step must be > 0")

    @classmethod
    def fixed(cls, t_end, dt=1e-3, t_start=0.0):
        return cls(t_start=t_start, t_end=t_end, method=Method.RK4_FIXED, dt=dt)

    @classmethod
    def adaptive(cls, t_end, rel_tol=1e-3, abs_tol=1e-6, t_start=0.0, max_step=np.inf):
        return cls(t_start=t_start, t_end=t_end, rel_tol=rel_tol, abs_tol=abs_tol,
                   max_step=max_step)


@dataclass
class SimResult:
    """Sampled trajectory.

    ``states`` has shape ``(len(times), n)``.  ``channels`` holds any extra
    per-sample signals (inputs, references, errors) keyed by name, each with
    the same leading length as ``times``.
    """

    times: np.ndarray
    states: np.ndarray
    names: Sequence[str] = ()
    channels: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if not self.names:
            self.names = tuple(f"x{i}" for i in range(self.states.shape[1]))
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def __getitem__(self, name):
        if name in self.channels:
            return self.channels[name]
        if name not in self.names:
            raise KeyError(name)
        return self.states[:, list(self.names).index(name)]

    def add_channel(self, name, values):
        values = np.asarray(values, dtype=float)
        if values.shape[0] != self.times.shape[0]:
            raise ValueError(f"channel {name!r} has {values.shape[0]} samples, expected "
                             f"{self.times.shape[0]}")
        self.channels[name] = values

    def at(self, t):
        """States linearly interpolated at times ``t``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty((t.size, self.states.shape[1]))
        for j in range(self.states.shape[1]):
            out[:, j] = np.interp(t, self.times, self.states[:, j])
        return out

    def resample(self, dt):
        """Uniformly resampled copy (states and channels, linear interpolation)."""
        n = int(round((self.times[-1] - self.times[0]) / dt))
        grid = self.times[0] + dt * np.arange(n + 1)
        grid = grid[grid <= self.times[-1] + 1e-12]
        res = SimResult(grid, self.at(grid), tuple(self.names))
        for k, v in self.channels.items():
            v2 = np.asarray(v)
            if v2.ndim == 1:
                res.channels[k] = np.interp(grid, self.times, v2)
            else:
                res.channels[k] = np.column_stack(
                    [np.interp(grid, self.times, v2[:, j]) for j in range(v2.shape[1])])
        return res


def _checked(f, t, x):
    dx = np.asarray(f(t, x), dtype=float)
    if dx.shape != x.shape:
        raise ConfigurationError(f"vector field returned shape {dx.shape}, state has {x.shape}")
    if not np.all(np.isfinite(dx)):
        raise DivergenceError(f"non-finite derivative at t={t:.6g}", time=t)
    return dx


def _rk4(f, x0, cfg):
    n = int(np.ceil((cfg.t_end - cfg.t_start) / cfg.dt - 1e-9))
    times = cfg.t_start + cfg.dt * np.arange(n + 1)
    times[-1] = cfg.t_end
    xs = np.empty((n + 1, x0.size))
    xs[0] = x0
    done = [0]
    try:
        _rk4_loop(f, times, xs, done)
    except FlatneuroError as exc:
        exc.partial = (times[:done[0] + 1], xs[:done[0] + 1])
        raise
    return times, xs


def _rk4_loop(f, times, xs, done):
    x = xs[0]
    for i in range(times.size - 1):
        t = times[i]
        h = times[i + 1] - t
        k1 = _checked(f, t, x)
        k2 = _checked(f, t + h / 2, x + h / 2 * k1)
        k3 = _checked(f, t + h / 2, x + h / 2 * k2)
        k4 = _checked(f, t + h, x + h * k3)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise DivergenceError(f"state became non-finite at t={times[i + 1]:.6g}",
                                  time=times[i + 1])
        xs[i + 1] = x
        done[0] = i + 1


# Dormand-Prince 5(4) tableau
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def _dopri(f, x0, cfg):
    t = cfg.t_start
    x = x0
    h = min(cfg.dt, cfg.max_step, cfg.t_end - cfg.t_start)
    times = [t]
    xs = [x]
    try:
        _dopri_loop(f, cfg, times, xs, h)
    except FlatneuroError as exc:
        exc.partial = (np.array(times), np.array(xs))
        raise
    return np.array(times), np.array(xs)


def _dopri_loop(f, cfg, times, xs, h):
    t, x = times[0], xs[0]
    k = np.empty((7, x.size))
    k[0] = _checked(f, t, x)
    while t < cfg.t_end:
        if t + h > cfg.t_end:
            h = cfg.t_end - t
        for s in range(1, 7):
            xs_ = x + h * np.dot(_A[s], k[:s])
            k[s] = _checked(f, t + _C[s] * h, xs_)
        x_new = x + h * (_B5 @ k)
        err_vec = h * (_E @ k)
        scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(x), np.abs(x_new))
        err = np.max(np.abs(err_vec) / scale) if x.size else 0.0
        if not np.isfinite(err):
            err = np.inf
        if err <= 1.0:
            t_new = t + h
            if cfg.t_end - t_new < 1e-12 * max(1.0, abs(cfg.t_end)):
                t_new = cfg.t_end
            t, x = t_new, x_new
            if not np.all(np.isfinite(x)):
                raise DivergenceError(f"state became non-finite at t={t:.6g}", time=t)
            times.append(t)
            xs.append(x)
            k[0] = k[6]  # first-same-as-last
            fac = 5.0 if err == 0 else min(5.0, 0.9 * err ** -0.2)
        else:
            fac = max(0.2, 0.9 * err ** -0.2) if np.isfinite(err) else 0.2
        h = min(h * fac, cfg.max_step)
        if h < MIN_STEP and t < cfg.t_end:
            raise StiffnessError(f"step size underflow ({h:.3g} s) at t={t:.6g}", time=t)


def integrate(f: Callable[[float, np.ndarray], np.ndarray], x0, cfg: IntegratorConfig,
              names: Sequence[str] = ()) -> SimResult:
    """Integrate ``x' = f(t, x)`` from ``x0`` over ``cfg``'s span.

    Raises
    ------
    StiffnessError
        The adaptive step fell below 1e-12 s.
    DivergenceError
        ``f`` returned a non-finite value, or the state did; ``time`` is set.

    Any package error raised while stepping (including ones raised by ``f``)
    carries the accepted steps so far as a :class:`SimResult` in ``partial``.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    try:
        if cfg.method is Method.RK4_FIXED:
            times, xs = _rk4(f, x0, cfg)
        else:
            times, xs = _dopri(f, x0, cfg)
    except FlatneuroError as exc:
        exc.partial = SimResult(*exc.partial, tuple(names))
        raise
    return SimResult(times, xs, tuple(names))


def second_order_error(kp, kd, e0, de0, t):
    """Exact solution of ``e'' + kd e' + kp e = 0`` and a decaying envelope.

    Needs real roots (``kd^2 >= 4 kp``).  The envelope is
    ``(|A| + |B|) exp(-s_min t)`` for distinct roots ``s_min < s_max`` and
    ``(|e0| + |de0 + s e0| t) exp(-s t)`` for a double root.  Returns
    ``(e, envelope)``.
    """
    t = np.asarray(t, dtype=float)
    disc = kd * kd - 4.0 * kp
    if disc < -1e-12 * kd * kd:
        raise ConfigurationError("envelope needs real roots (kd^2 >= 4 kp)")
    if abs(disc) <= 1e-12 * kd * kd:
        s = 0.5 * kd
        c = de0 + s * e0
        decay = np.exp(-s * t)
        return (e0 + c * t) * decay, (abs(e0) + abs(c) * t) * decay
    s1 = 0.5 * (kd - np.sqrt(disc))
    s2 = 0.5 * (kd + np.sqrt(disc))
    B = -(de0 + s1 * e0) / (s2 - s1)
    A = e0 - B
    e = A * np.exp(-s1 * t) + B * np.exp(-s2 * t)
    return e, (abs(A) + abs(B)) * np.exp(-s1 * t)
