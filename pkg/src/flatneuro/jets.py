"""Truncated Taylor arithmetic ("jets") for exact higher-order derivatives.

A :class:`Jet` of order ``n`` stores the normalized Taylor coefficients
``c[k] = f^(k)(t) / k!`` for ``k = 0..n``.  Coefficients may carry trailing
batch dimensions, so a single jet can represent a whole time grid.

The elementary functions below (``exp``, ``log``, ``sqrt``, ``tanh``, ...)
dispatch on their argument: plain floats and arrays go to numpy, jets go to
the usual Taylor recurrences.  Formulas written with them therefore work for
values *and* for derivative propagation, which is how every flatness chain in
the package obtains analytic derivatives without finite differences.
"""
from __future__ import annotations

from math import factorial

import numpy as np

__all__ = [
    "Jet",
    "exp",
    "log",
    "sqrt",
    "power",
    "tanh",
    "arctan2",
    "where",
    "diff",
    "truncate",
    "compose",
    "revert",
]


def _lift(c, shape):
    """Broadcast coefficient array ``c`` (``(n+1,) + batch``) to ``(n+1,) + shape``."""
    pad = len(shape) - (c.ndim - 1)
    c = c.reshape(c.shape[:1] + (1,) * pad + c.shape[1:])
    return np.broadcast_to(c, c.shape[:1] + tuple(shape))


def _as_coeffs(x, order, shape):
    c = np.zeros((order + 1,) + shape)
    c[0] = x
    return c


class Jet:
    """Truncated Taylor polynomial ``sum_k c[k] s^k``."""

    __slots__ = ("c",)
    __array_ufunc__ = None  # numpy operands defer to the reflected Jet methods

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs, dtype=float)
        if self.c.ndim == 0:
            raise ValueError("a jet needs at least one coefficient")

    # -- constructors -----------------------------------------------------
    @classmethod
    def variable(cls, x0, order):
        """Jet of the identity map at ``x0`` (derivative 1, higher ones 0)."""
        x0 = np.asarray(x0, dtype=float)
        c = _as_coeffs(x0, order, x0.shape)
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def constant(cls, x0, order):
        x0 = np.asarray(x0, dtype=float)
        return cls(_as_coeffs(x0, order, x0.shape))

    @classmethod
    def from_derivatives(cls, derivs):
        d = np.asarray(derivs, dtype=float)
        fac = np.array([factorial(k) for k in range(d.shape[0])], dtype=float)
        return cls(d / fac.reshape((-1,) + (1,) * (d.ndim - 1)))

    # -- accessors --------------------------------------------------------
    @property
    def order(self):
        return self.c.shape[0] - 1

    @property
    def value(self):
        return self.c[0]

    def derivatives(self):
        """Array of derivatives ``f, f', ..., f^(n)`` (shape ``(n+1, ...)``)."""
        fac = np.array([factorial(k) for k in range(self.order + 1)], dtype=float)
        return self.c * fac.reshape((-1,) + (1,) * (self.c.ndim - 1))

    def derivative(self, k):
        return self.c[k] * factorial(k)

    def __repr__(self):
        return f"Jet(order={self.order}, value={self.c[0]!r})"

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            n = min(self.order, other.order)
            shape = np.broadcast_shapes(self.c.shape[1:], other.c.shape[1:])
            return Jet(_lift(self.c[: n + 1], shape)), Jet(_lift(other.c[: n + 1], shape))
        other = np.asarray(other, dtype=float)
        shape = np.broadcast_shapes(other.shape, self.c.shape[1:])
        mine = Jet(_lift(self.c, shape))
        return mine, Jet(_as_coeffs(other, self.order, shape))

    def __neg__(self):
        return Jet(-self.c)

    def __pos__(self):
        return self

    def __add__(self, other):
        a, b = self._coerce(other)
        return Jet(a.c + b.c)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._coerce(other)
        return Jet(a.c - b.c)

    def __rsub__(self, other):
        a, b = self._coerce(other)
        return Jet(b.c - a.c)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            other = np.asarray(other, dtype=float)
            shape = np.broadcast_shapes(other.shape, self.c.shape[1:])
            return Jet(_lift(self.c, shape) * other[np.newaxis])
        a, b = self._coerce(other)
        n = a.order
        shape = np.broadcast_shapes(a.c.shape, b.c.shape)
        c = np.zeros(shape)
        for k in range(n + 1):
            c[k] = sum(a.c[j] * b.c[k - j] for j in range(k + 1))
        return Jet(c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            other = np.asarray(other, dtype=float)
            shape = np.broadcast_shapes(other.shape, self.c.shape[1:])
            return Jet(_lift(self.c, shape) / other[np.newaxis])
        a, b = self._coerce(other)
        return a * b.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def reciprocal(self):
        b = self.c
        n = self.order
        c = np.zeros_like(b)
        c[0] = 1.0 / b[0]
        for k in range(1, n + 1):
            c[k] = -sum(b[j] * c[k - j] for j in range(1, k + 1)) / b[0]
        return Jet(c)

    def __pow__(self, p):
        if isinstance(p, Jet):
            return exp(log(self) * p)
        return power(self, float(p))


def _integrate(value0, a, dfa):
    """Coefficients of ``f(a)`` given ``f(a0)`` and the jet of ``f'(a)``.

    Uses ``(f o a)' = f'(a) a'`` coefficient-wise.
    """
    n = a.order
    c = np.zeros(np.broadcast_shapes(a.c.shape, dfa.c.shape))
    c[0] = value0
    for k in range(1, n + 1):
        c[k] = sum(j * a.c[j] * dfa.c[k - j] for j in range(1, k + 1)) / k
    return Jet(c)


def exp(x):
    if not isinstance(x, Jet):
        return np.exp(x)
    a = x.c
    n = x.order
    c = np.zeros_like(a)
    c[0] = np.exp(a[0])
    for k in range(1, n + 1):
        c[k] = sum(j * a[j] * c[k - j] for j in range(1, k + 1)) / k
    return Jet(c)


def log(x):
    if not isinstance(x, Jet):
        return np.log(x)
    a0 = x.c[0]
    return _integrate(np.log(a0), x, x.reciprocal())


def power(x, p):
    """``x ** p`` for a real exponent ``p``; the base must be non-zero for jets."""
    if not isinstance(x, Jet):
        return np.power(x, p)
    a = x.c
    n = x.order
    c = np.zeros_like(a)
    c[0] = np.power(a[0], p)
    for k in range(1, n + 1):
        c[k] = sum(((p + 1.0) * j - k) * a[j] * c[k - j] for j in range(1, k + 1)) / (k * a[0])
    return Jet(c)


def sqrt(x):
    if not isinstance(x, Jet):
        return np.sqrt(x)
    return power(x, 0.5)


def tanh(x):
    if not isinstance(x, Jet):
        return np.tanh(x)
    # tanh' = 1 - tanh^2, integrated order by order
    n = x.order
    t = Jet(np.zeros_like(x.c))
    t.c[0] = np.tanh(x.c[0])
    for k in range(1, n + 1):
        low = Jet(t.c[:k])
        d = 1.0 - low * low
        t.c[k] = sum(j * x.c[j] * d.c[k - j] for j in range(1, k + 1)) / k
    return t


def arctan2(y, x):
    if not isinstance(y, Jet) and not isinstance(x, Jet):
        return np.arctan2(y, x)
    if not isinstance(y, Jet):
        y = Jet.constant(y, x.order)
    if not isinstance(x, Jet):
        x = Jet.constant(x, y.order)
    y, x = y._coerce(x)
    n = y.order
    # d(atan2) = (x dy - y dx) / (x^2 + y^2)
    c = np.zeros(np.broadcast_shapes(y.c.shape, x.c.shape))
    c[0] = np.arctan2(y.c[0], x.c[0])
    if n == 0:
        return Jet(c)
    num_d = x * Jet(_shift_derivative(y.c)) - y * Jet(_shift_derivative(x.c))
    den = x * x + y * y
    q = (num_d / den).c
    for k in range(1, n + 1):
        c[k] = q[k - 1] / k
    return Jet(c)


def _shift_derivative(c):
    """Taylor coefficients of the derivative, padded to the same order."""
    n = c.shape[0] - 1
    d = np.zeros_like(c)
    for k in range(n):
        d[k] = (k + 1) * c[k + 1]
    return d


def diff(x):
    """Jet of the derivative, one order lower."""
    n = x.order
    if n == 0:
        raise ValueError("cannot differentiate an order-0 jet")
    k = np.arange(1, n + 1).reshape((-1,) + (1,) * (x.c.ndim - 1))
    return Jet(x.c[1:] * k)


def truncate(x, order):
    return Jet(x.c[: order + 1])


def where(cond, a, b):
    """Branch selection on base values; ``cond`` is evaluated by the caller."""
    if not isinstance(a, Jet) and not isinstance(b, Jet):
        return np.where(cond, a, b)
    order = a.order if isinstance(a, Jet) else b.order
    if not isinstance(a, Jet):
        a = Jet.constant(np.broadcast_to(a, np.shape(cond)), order)
    if not isinstance(b, Jet):
        b = Jet.constant(np.broadcast_to(b, np.shape(cond)), order)
    return Jet(np.where(cond, a.c, b.c))


def value_of(x):
    return x.c[0] if isinstance(x, Jet) else np.asarray(x, dtype=float)


def compose(fderivs, inner):
    """Jet of ``f(inner)`` from the derivatives ``f(a0), f'(a0), ...``.

    ``fderivs`` has shape ``(n+1, ...)`` matching ``inner``'s batch shape.
    """
    n = inner.order
    fd = np.asarray(fderivs, dtype=float)
    delta = Jet(inner.c.copy())
    delta.c[0] = 0.0
    out = np.zeros(np.broadcast_shapes(inner.c.shape, fd[: n + 1].shape))
    out[0] = fd[0]
    term = Jet.constant(np.ones(inner.c.shape[1:]), n)
    for j in range(1, n + 1):
        term = term * delta
        out = out + (fd[j] / factorial(j)) * term.c
    return Jet(out)


def revert(fderivs):
    """Derivatives of the inverse function from those of ``f`` at a point.

    Given ``f(x0), f'(x0), ..., f^(n)(x0)`` returns ``g(y0), g'(y0), ...``
    where ``g = f^{-1}`` and ``y0 = f(x0)``; the caller provides ``g(y0)``
    separately, so entry 0 is left to it.  Series reversion is done order by
    order, which needs ``f'(x0) != 0``.
    """
    fd = np.asarray(fderivs, dtype=float)
    n = fd.shape[0] - 1
    a = Jet.from_derivatives(fd)
    a.c[0] = 0.0
    b = np.zeros_like(fd)
    if n == 0:
        return b
    b[1] = 1.0 / a.c[1]
    for k in range(2, n + 1):
        trial = Jet(b.copy())
        comp = compose(Jet(a.c).derivatives(), trial)
        b[k] = -comp.c[k] / a.c[1]
    return Jet(b).derivatives()
