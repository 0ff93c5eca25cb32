"""Pure-Python versions of the sequential convolution recursions.

These are the reference implementations; ``_ckernels`` compiles the same
loops.  Both are exact for the trapezoid rule on a uniform grid.
"""
import math

import numpy as np


def exp_conv_onesided(v, dr, a):
    """Trapezoid approximation of ``c(r_i) = int_{r_0}^{r_i} exp(-a (r_i - s)) v(s) ds``.

    Uses ``c_i = E c_{i-1} + dr/2 (E v_{i-1} + v_i)`` with ``E = exp(-a dr)``.
    """
    v = np.ascontiguousarray(v, dtype=float)
    n = v.shape[0]
    out = np.empty(n)
    if n == 0:
        return out
    e = math.exp(-a * dr)
    h = 0.5 * dr
    c = 0.0
    out[0] = 0.0
    prev = float(v[0])
    for i in range(1, n):
        cur = float(v[i])
        c = e * c + h * (e * prev + cur)
        out[i] = c
        prev = cur
    return out


def liouville_conv(g, dt, kappa):
    """Trapezoid approximation of ``int_0^{t_n} (t_n - s) exp(-kappa (t_n - s)) g(s) ds``.

    Two running sums give O(N) cost:
    ``P_n = E P_{n-1} + g_n`` and ``A_n = E (A_{n-1} + dt P_{n-1})``; the
    trapezoid value is ``dt (A_n - K(t_n) g_0 / 2)`` because the kernel
    vanishes at zero lag.
    """
    g = np.ascontiguousarray(g, dtype=float)
    n = g.shape[0]
    out = np.empty(n)
    if n == 0:
        return out
    e = math.exp(-kappa * dt)
    g0 = float(g[0])
    p = g0
    acc = 0.0
    out[0] = 0.0
    for i in range(1, n):
        acc = e * (acc + dt * p)
        p = e * p + float(g[i])
        t = i * dt
        out[i] = dt * (acc - 0.5 * t * math.exp(-kappa * t) * g0)
    return out
