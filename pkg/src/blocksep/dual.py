"""Forward-mode automatic differentiation on dual numbers.

A :class:`Dual` carries a value and a single tangent component.  The
components may themselves be duals, so nesting two levels gives exact
second partial derivatives.  The module-level math functions accept
plain floats or duals and dispatch on the argument type, which lets
numeric code be written once and evaluated at any differentiation
depth.

Mixing duals of different nesting depth in one arithmetic expression is
not supported; callers seed every perturbed input at the same depth.
"""

from __future__ import annotations

import math


class Dual:
    """Value plus one tangent component, both possibly duals."""

    __slots__ = ("re", "im")

    def __init__(self, re, im):
        self.re = re
        self.im = im

    def __repr__(self):
        return f"Dual({self.re!r}, {self.im!r})"

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.re + other.re, self.im + other.im)
        return Dual(self.re + other, self.im)

    def __radd__(self, other):
        return Dual(other + self.re, self.im)

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.re - other.re, self.im - other.im)
        return Dual(self.re - other, self.im)

    def __rsub__(self, other):
        return Dual(other - self.re, -self.im)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.re * other.re,
                        self.re * other.im + self.im * other.re)
        return Dual(self.re * other, self.im * other)

    def __rmul__(self, other):
        return Dual(other * self.re, other * self.im)

    def __truediv__(self, other):
        if isinstance(other, Dual):
            q = self.re / other.re
            return Dual(q, (self.im - q * other.im) / other.re)
        return Dual(self.re / other, self.im / other)

    def __rtruediv__(self, other):
        q = other / self.re
        return Dual(q, -q * self.im / self.re)

    def __neg__(self):
        return Dual(-self.re, -self.im)

    def __pos__(self):
        return self

    def __abs__(self):
        # |x| is locally linear away from 0; at exactly 0 the right
        # derivative is used.
        return self if real(self) >= 0.0 else -self

    def __pow__(self, k):
        return powc(self, k)


def real(x):
    """Deepest real part: the plain float value under any nesting."""
    while isinstance(x, Dual):
        x = x.re
    return x


def powc(x, k):
    """x**k for a constant real exponent k, valid for negative bases
    when k is an integer."""
    if k == 0:
        return 1.0
    if isinstance(x, Dual):
        return Dual(powc(x.re, k), (k * powc(x.re, k - 1)) * x.im)
    return x ** k


def sin(x):
    if isinstance(x, Dual):
        return Dual(sin(x.re), cos(x.re) * x.im)
    return math.sin(x)


def cos(x):
    if isinstance(x, Dual):
        return Dual(cos(x.re), -(sin(x.re) * x.im))
    return math.cos(x)


def tan(x):
    if isinstance(x, Dual):
        c = cos(x.re)
        return Dual(tan(x.re), x.im / (c * c))
    return math.tan(x)


def exp(x):
    if isinstance(x, Dual):
        e = exp(x.re)
        return Dual(e, e * x.im)
    return math.exp(x)


def ln(x):
    if isinstance(x, Dual):
        return Dual(ln(x.re), x.im / x.re)
    return math.log(x)


def sqrt(x):
    if isinstance(x, Dual):
        s = sqrt(x.re)
        return Dual(s, x.im / (s + s))
    return math.sqrt(x)
