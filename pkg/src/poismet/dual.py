"""Dual numbers for forward-mode differentiation.

A ``Dual`` holds a value part ``a`` and a tangent part ``b``; both parts may
themselves be duals, so nesting two levels yields exact second derivatives
and three levels exact third derivatives.  Plain numbers mix freely with
duals and are treated as constants of the surrounding level.
"""

import math


class Dual:
    __slots__ = ("a", "b")

    def __init__(self, a, b):
        self.a = a
        self.b = b

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.a + other.a, self.b + other.b)
        return Dual(self.a + other, self.b)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.a - other.a, self.b - other.b)
        return Dual(self.a - other, self.b)

    def __rsub__(self, other):
        return Dual(other - self.a, -self.b)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.a * other.a, self.a * other.b + self.b * other.a)
        return Dual(self.a * other, self.b * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            q = self.a / other.a
            return Dual(q, (self.b - q * other.b) / other.a)
        return Dual(self.a / other, self.b / other)

    def __rtruediv__(self, other):
        q = other / self.a
        return Dual(q, -q * self.b / self.a)

    def __neg__(self):
        return Dual(-self.a, -self.b)

    def __pos__(self):
        return self

    def __repr__(self):
        return f"Dual({self.a!r}, {self.b!r})"


def value(x):
    """Strip all tangent parts and return the underlying float."""
    while isinstance(x, Dual):
        x = x.a
    return x


def tangent(x):
    """Tangent part of the outermost level; constants have tangent 0."""
    return x.b if isinstance(x, Dual) else 0.0


def sin(x):
    if isinstance(x, Dual):
        return Dual(sin(x.a), cos(x.a) * x.b)
    return math.sin(x)


def cos(x):
    if isinstance(x, Dual):
        return Dual(cos(x.a), -sin(x.a) * x.b)
    return math.cos(x)


def tan(x):
    if isinstance(x, Dual):
        t = tan(x.a)
        return Dual(t, (1.0 + t * t) * x.b)
    return math.tan(x)


def exp(x):
    if isinstance(x, Dual):
        e = exp(x.a)
        return Dual(e, e * x.b)
    return math.exp(x)


def log(x):
    if isinstance(x, Dual):
        return Dual(log(x.a), x.b / x.a)
    return math.log(x)


def sqrt(x):
    if isinstance(x, Dual):
        s = sqrt(x.a)
        return Dual(s, x.b / (s + s))
    return math.sqrt(x)


def powi(x, k):
    """x**k for a nonnegative integer k, by repeated multiplication."""
    out = 1.0
    for _ in range(k):
        out = out * x
    return out


FUNCTIONS = {"sin": sin, "cos": cos, "tan": tan, "exp": exp, "log": log, "sqrt": sqrt}
