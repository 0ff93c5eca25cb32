"""Planar two-link arm: dynamics, kinematics, flat open-loop torques and
end-effector tracking.

State ordering is ``(theta1, dtheta1, theta2, dtheta2)``.  Gravity enters as
``G = dV/dtheta`` with ``V = -g [(m1 r1 + m2 l1) cos th1 + m2 r2 cos(th1 + th2)]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .errors import AmbiguityError, ConfigurationError, ReachabilityError, SingularityError
from .integrate import IntegratorConfig, SimResult, integrate
from .trajectory import RefTrajectory, line, tanh_of_line

__all__ = [
    "ArmParams",
    "ArmGains",
    "Elbow",
    "mass_coriolis_gravity",
    "forward_kinematics",
    "end_effector_velocity",
    "inverse_kinematics",
    "end_effector_matrices",
    "det_h_reduced",
    "joint_reference",
    "arm_open_loop",
    "arm_tracking_law",
    "arm_rhs",
    "arm_simulate",
    "energy",
    "reference_path",
    "perturbed_initial_state",
]

DET_FLOOR = 1e-9


@dataclass(frozen=True)
class ArmParams:
    """Link lengths, centre-of-mass offsets, masses, inertias and gravity.

    Defaults are a human upper/lower arm (metres, kilograms).
    """

    l1: float = 0.3384
    l2: float = 0.4554
    r1: float = 0.1692
    r2: float = 0.2277
    m1: float = 2.10
    m2: float = 1.65
    J1: float = 0.025
    J2: float = 0.075
    g: float = 9.81

    def __post_init__(self):
        for name in ("l1", "l2", "r1", "r2", "m1", "m2", "J1", "J2", "g"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be > 0")
        if self.r1 > self.l1 or self.r2 > self.l2:
            raise ConfigurationError("centre of mass must lie on its link (r <= l)")


@dataclass(frozen=True)
class ArmGains:
    """Diagonal position (``lam00``, ``lam01``) and velocity (``lam10``, ``lam11``) gains."""

    lam00: float = 50.0
    lam01: float = 72.0
    lam10: float = 15.0
    lam11: float = 18.0

    def __post_init__(self):
        if min(self.lam00, self.lam01, self.lam10, self.lam11) <= 0:
            raise ConfigurationError("all arm gains must be > 0")

    @classmethod
    def from_poles(cls, s1, s2):
        """Gains placing each axis at ``(s + s_k)(s + 2 s_k)``."""
        return cls(2 * s1 * s1, 2 * s2 * s2, 3 * s1, 3 * s2)

    @property
    def kp(self):
        return np.array([self.lam00, self.lam01])

    @property
    def kd(self):
        return np.array([self.lam10, self.lam11])


class Elbow(str, Enum):
    UP = "up"
    DOWN = "down"  # sin(theta2) >= 0


def mass_coriolis_gravity(p: ArmParams, th1, dth1, th2, dth2):
    """``M`` (2x2), ``C`` and ``G`` (2-vectors) at one state."""
    c2, s2 = math.cos(th2), math.sin(th2)
    m2l1r2 = p.m2 * p.l1 * p.r2
    M11 = p.J1 + p.J2 + p.m1 * p.r1 ** 2 + p.m2 * (p.l1 ** 2 + p.r2 ** 2 + 2 * p.l1 * p.r2 * c2)
    M12 = p.J2 + p.m2 * (p.r2 ** 2 + p.l1 * p.r2 * c2)
    M22 = p.J2 + p.m2 * p.r2 ** 2
    M = np.array([[M11, M12], [M12, M22]])
    C = np.array([-m2l1r2 * s2 * (dth2 ** 2 + 2 * dth1 * dth2), m2l1r2 * s2 * dth1 ** 2])
    s12 = math.sin(th1 + th2)
    G = np.array([p.g * (p.m2 * p.l1 + p.m1 * p.r1) * math.sin(th1) + p.g * p.m2 * p.r2 * s12,
                  p.g * p.m2 * p.r2 * s12])
    return M, C, G


def forward_kinematics(p: ArmParams, th1, th2):
    th1 = np.asarray(th1, dtype=float)
    th2 = np.asarray(th2, dtype=float)
    hx = p.l1 * np.cos(th1) + p.l2 * np.cos(th1 + th2)
    hy = p.l1 * np.sin(th1) + p.l2 * np.sin(th1 + th2)
    return hx, hy


def end_effector_velocity(p: ArmParams, th1, dth1, th2, dth2):
    w12 = dth1 + dth2
    dhx = -p.l1 * dth1 * np.sin(th1) - p.l2 * w12 * np.sin(th1 + th2)
    dhy = p.l1 * dth1 * np.cos(th1) + p.l2 * w12 * np.cos(th1 + th2)
    return dhx, dhy


def inverse_kinematics(p: ArmParams, hx, hy, elbow: Elbow = Elbow.DOWN):
    """Joint angles reaching ``(hx, hy)``; vectorized.

    Raises ``ReachabilityError`` outside the annulus ``|l1 - l2| <= |h| <= l1 + l2``
    and ``AmbiguityError`` at the origin when ``l1 == l2``.
    """
    elbow = Elbow(elbow)
    hx = np.asarray(hx, dtype=float)
    hy = np.asarray(hy, dtype=float)
    r2 = hx * hx + hy * hy
    if p.l1 == p.l2 and np.any(r2 == 0.0):
        raise AmbiguityError("target at the origin with equal links: any theta1 works")
    hbar = (r2 - p.l1 ** 2 - p.l2 ** 2) / (2 * p.l1 * p.l2)
    if np.any(np.abs(hbar) > 1 + 1e-12):
        raise ReachabilityError("target outside the reachable annulus")
    hbar = np.clip(hbar, -1.0, 1.0)
    sign = 1.0 if elbow is Elbow.DOWN else -1.0
    s2 = sign * np.sqrt(1.0 - hbar * hbar)
    th2 = np.arctan2(s2, hbar)
    th1 = np.arctan2(hy, hx) - np.arctan2(p.l2 * s2, p.l1 + p.l2 * hbar)
    if th1.ndim:
        th1 = np.unwrap(th1)
        th2 = np.unwrap(th2)
    return th1, th2


def end_effector_matrices(p: ArmParams, th1, dth1, th2, dth2):
    """``H``, ``phi`` and ``det H`` with ``h'' = H theta'' - phi``."""
    hx, hy = forward_kinematics(p, th1, th2)
    s12, c12 = math.sin(th1 + th2), math.cos(th1 + th2)
    H = np.array([[-hy, -p.l2 * s12], [hx, p.l2 * c12]])
    w12 = dth1 + dth2
    phi = np.array([
        p.l1 * dth1 ** 2 * math.cos(th1) + p.l2 * w12 ** 2 * c12,
        p.l1 * dth1 ** 2 * math.sin(th1) + p.l2 * w12 ** 2 * s12,
    ])
    det = p.l2 * (hx * s12 - hy * c12)
    return H, phi, float(det)


def det_h_reduced(p: ArmParams, th1, th2):
    """``det H`` from the elbow geometry: ``-l1 (hx sin th1 - hy cos th1) = l1 l2 sin th2``."""
    hx, hy = forward_kinematics(p, th1, th2)
    return -p.l1 * (hx * np.sin(th1) - hy * np.cos(th1))


def _solve_h(H, det, rhs, t=None):
    if abs(det) < DET_FLOOR:
        where = "" if t is None else f" at t={t:.6g}"
        raise SingularityError(f"|det H| = {abs(det):.3g} below {DET_FLOOR:g}{where} "
                               "(arm extended or folded)", time=t)
    # explicit 2x2 adjugate
    return np.array([H[1, 1] * rhs[0] - H[0, 1] * rhs[1],
                     -H[1, 0] * rhs[0] + H[0, 0] * rhs[1]]) / det


def joint_reference(p: ArmParams, ref_x: RefTrajectory, ref_y: RefTrajectory, t,
                    elbow: Elbow = Elbow.DOWN):
    """Joint angles, rates and accelerations along an end-effector reference.

    Rates and accelerations come from ``theta' = H^-1 h'`` and
    ``theta'' = H^-1 (h'' + phi)``.  Returns ``(th, dth, ddth)``, each of shape
    ``(2,) + t.shape``.
    """
    t = np.asarray(t, dtype=float)
    dx = ref_x.derivs(t, 2)
    dy = ref_y.derivs(t, 2)
    th1, th2 = inverse_kinematics(p, dx[0], dy[0], elbow)
    th1 = np.atleast_1d(th1)
    th2 = np.atleast_1d(th2)
    flat = [np.atleast_1d(a).ravel() for a in (dx[1], dy[1], dx[2], dy[2])]
    n = th1.size
    out = np.empty((3, 2, n))
    for i in range(n):
        H, _, det = end_effector_matrices(p, th1.flat[i], 0.0, th2.flat[i], 0.0)
        tt = float(np.ravel(t)[i]) if t.ndim else float(t)
        dth = _solve_h(H, det, np.array([flat[0][i], flat[1][i]]), tt)
        _, phi, _ = end_effector_matrices(p, th1.flat[i], dth[0], th2.flat[i], dth[1])
        ddth = _solve_h(H, det, np.array([flat[2][i], flat[3][i]]) + phi, tt)
        out[0, :, i] = th1.flat[i], th2.flat[i]
        out[1, :, i] = dth
        out[2, :, i] = ddth
    shape = (2,) + t.shape
    return tuple(o.reshape(shape) for o in out)


def arm_open_loop(p: ArmParams, ref_x: RefTrajectory, ref_y: RefTrajectory, t,
                  elbow: Elbow = Elbow.DOWN):
    """Torque ``T_r = C_r + G_r + M_r H_r^-1 (h_r'' + phi_r)`` at a single time."""
    th, dth, ddth = joint_reference(p, ref_x, ref_y, float(t), elbow)
    M, C, G = mass_coriolis_gravity(p, th[0], dth[0], th[1], dth[1])
    return C + G + M @ ddth


def arm_tracking_law(p: ArmParams, g: ArmGains, ref_x: RefTrajectory, ref_y: RefTrajectory,
                     t, x):
    """Torque ``C + G + M H^-1 (phi + h_r'' - L0 e - L1 e')`` at state ``x``."""
    th1, dth1, th2, dth2 = x
    M, C, G = mass_coriolis_gravity(p, th1, dth1, th2, dth2)
    H, phi, det = end_effector_matrices(p, th1, dth1, th2, dth2)
    dx = ref_x.derivs(t, 2)
    dy = ref_y.derivs(t, 2)
    hx, hy = forward_kinematics(p, th1, th2)
    dhx, dhy = end_effector_velocity(p, th1, dth1, th2, dth2)
    e = np.array([hx - dx[0], hy - dy[0]])
    de = np.array([dhx - dx[1], dhy - dy[1]])
    v = phi + np.array([dx[2], dy[2]]) - g.kp * e - g.kd * de
    return C + G + M @ _solve_h(H, det, v, t)


def arm_rhs(p: ArmParams, law: Callable) -> Callable:
    def f(t, x):
        th1, dth1, th2, dth2 = x
        M, C, G = mass_coriolis_gravity(p, th1, dth1, th2, dth2)
        T = law(t, x)
        dd = np.linalg.solve(M, T - C - G)
        return np.array([dth1, dd[0], dth2, dd[1]])

    return f


NAMES = ("theta1", "dtheta1", "theta2", "dtheta2")


def arm_simulate(p: ArmParams, law: Callable, x0, cfg: IntegratorConfig,
                 ref=None, open_loop: Callable | None = None) -> SimResult:
    """Simulate under ``law(t, x)``; adds torque and end-effector channels.

    With ``ref = (ref_x, ref_y)`` the reference and error channels are added,
    and ``open_loop(t)`` (if given) adds the feedforward torque ``T1r``, ``T2r``.
    A ``SingularityError`` raised by the law carries the partial result in
    its ``partial`` attribute.
    """
    res = integrate(arm_rhs(p, law), x0, cfg, names=NAMES)
    s = res.states
    hx, hy = forward_kinematics(p, s[:, 0], s[:, 2])
    res.add_channel("hx", hx)
    res.add_channel("hy", hy)
    T = np.array([law(t, x) for t, x in zip(res.times, s)])
    res.add_channel("T1", T[:, 0])
    res.add_channel("T2", T[:, 1])
    if ref is not None:
        hxr = ref[0](res.times)
        hyr = ref[1](res.times)
        res.add_channel("hxr", hxr)
        res.add_channel("hyr", hyr)
        res.add_channel("ehx", hx - hxr)
        res.add_channel("ehy", hy - hyr)
    if open_loop is not None:
        Tr = np.array([open_loop(t) for t in res.times])
        res.add_channel("T1r", Tr[:, 0])
        res.add_channel("T2r", Tr[:, 1])
    return res


def energy(p: ArmParams, x):
    """Kinetic plus potential energy at state ``x``."""
    th1, dth1, th2, dth2 = x
    M, _, _ = mass_coriolis_gravity(p, th1, dth1, th2, dth2)
    w = np.array([dth1, dth2])
    V = -p.g * ((p.m1 * p.r1 + p.m2 * p.l1) * math.cos(th1) + p.m2 * p.r2 * math.cos(th1 + th2))
    return 0.5 * w @ M @ w + V


def reference_path(p: ArmParams, T=10.0, gamma=9.0):
    """Sweep ``hx`` linearly to zero while ``hy`` follows a tanh of ``hx``.

    ``hx`` runs from ``0.8 (l1 + l2)`` to 0 over ``T``; ``hy`` moves between
    ``-0.1 l1`` and ``l1 + 0.1 l2`` with its steepest change at half the
    initial ``hx``.  Returns ``(ref_x, ref_y)``.
    """
    hxi, hxf = 0.8 * (p.l1 + p.l2), 0.0
    hyi, hyf = p.l1 + 0.1 * p.l2, -0.1 * p.l1
    ref_x = line(hxi, (hxf - hxi) / T)
    ref_y = tanh_of_line(hxi, hxf, hyi, hyf, gamma, 0.5 * hxi, T)
    return ref_x, ref_y


def perturbed_initial_state(p: ArmParams, ref_x, ref_y, T=10.0, frac=0.05,
                            elbow: Elbow = Elbow.DOWN):
    """Start off the reference by ``frac`` of each joint quantity's range over ``[0, T]``.

    Mirrors the reference scenario: the second angle is offset by a fraction
    of the first angle's range.
    """
    th, dth, _ = joint_reference(p, ref_x, ref_y, np.array([0.0, T]), elbow)
    th1 = th[0, 0] + frac * (th[0, 1] - th[0, 0])
    dth1 = dth[0, 0] + frac * (dth[0, 1] - dth[0, 0])
    th2 = th[1, 0] + frac * (th[0, 1] - th[0, 0])
    dth2 = dth[1, 0] + frac * (dth[1, 1] - dth[1, 0])
    return np.array([th1, dth1, th2, dth2])
