# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the loops in ``_kernels_py``."""
import numpy as np
from libc.math cimport exp


def exp_conv_onesided(v, double dr, double a):
    cdef double[::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef Py_ssize_t n = vv.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    if n == 0:
        return out
    cdef double e = exp(-a * dr)
    cdef double h = 0.5 * dr
    cdef double c = 0.0
    cdef double prev = vv[0]
    cdef double cur
    cdef Py_ssize_t i
    o[0] = 0.0
    for i in range(1, n):
        cur = vv[i]
        c = e * c + h * (e * prev + cur)
        o[i] = c
        prev = cur
    return out


def liouville_conv(g, double dt, double kappa):
    cdef double[::1] gg = np.ascontiguousarray(g, dtype=np.float64)
    cdef Py_ssize_t n = gg.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    if n == 0:
        return out
    cdef double e = exp(-kappa * dt)
    cdef double g0 = gg[0]
    cdef double p = g0
    cdef double acc = 0.0
    cdef double t
    cdef Py_ssize_t i
    o[0] = 0.0
    for i in range(1, n):
        acc = e * (acc + dt * p)
        p = e * p + gg[i]
        t = i * dt
        o[i] = dt * (acc - 0.5 * t * exp(-kappa * t) * g0)
    return out
