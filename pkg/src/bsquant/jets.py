"""Truncated Taylor arithmetic (forward-mode differentiation to any order).

A :class:`Jet` stores normalized Taylor coefficients ``c[k] = f^(k)(x0)/k!``
along the first axis; trailing axes broadcast like numpy arrays, so a single
jet can carry a whole grid of expansion points.
"""

from __future__ import annotations

from math import factorial

import numpy as np

from .errors import DomainError


def _as_coeffs(value, order: int, shape) -> np.ndarray:
    c = np.zeros((order + 1,) + tuple(shape))
    c[0] = value
    return c


class Jet:
    __slots__ = ("c",)

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs, dtype=float)

    # construction -------------------------------------------------------
    @classmethod
    def variable(cls, x, order: int) -> "Jet":
        x = np.asarray(x, dtype=float)
        c = _as_coeffs(x, order, x.shape)
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def constant(cls, value, order: int, shape=()) -> "Jet":
        value = np.asarray(value, dtype=float)
        shape = np.broadcast_shapes(value.shape, tuple(shape))
        return cls(_as_coeffs(value, order, shape))

    @classmethod
    def from_derivatives(cls, derivs) -> "Jet":
        d = np.asarray(derivs, dtype=float)
        scale = np.array([1.0 / factorial(k) for k in range(d.shape[0])])
        return cls(d * scale.reshape((-1,) + (1,) * (d.ndim - 1)))

    # inspection ---------------------------------------------------------
    @property
    def order(self) -> int:
        return self.c.shape[0] - 1

    @property
    def value(self) -> np.ndarray:
        return self.c[0]

    def derivatives(self) -> np.ndarray:
        """Return ``[f, f', f'', ...]`` stacked along axis 0."""
        scale = np.array([float(factorial(k)) for k in range(self.order + 1)])
        return self.c * scale.reshape((-1,) + (1,) * (self.c.ndim - 1))

    def deriv(self) -> "Jet":
        """Jet of the derivative (one order lower)."""
        k = np.arange(1, self.order + 1, dtype=float)
        return Jet(self.c[1:] * k.reshape((-1,) + (1,) * (self.c.ndim - 1)))

    def truncate(self, order: int) -> "Jet":
        return Jet(self.c[: order + 1])

    # arithmetic ---------------------------------------------------------
    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.order, self.c.shape[1:])

    def __add__(self, other):
        o = self._coerce(other)
        n = min(self.order, o.order)
        return Jet(self.c[: n + 1] + o.c[: n + 1])

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c * np.asarray(other, dtype=float))
        n = min(self.order, other.order)
        a, b = self.c, other.c
        shape = np.broadcast_shapes(a.shape[1:], b.shape[1:])
        out = np.zeros((n + 1,) + shape)
        for k in range(n + 1):
            for i in range(k + 1):
                out[k] = out[k] + a[i] * b[k - i]
        return Jet(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c / np.asarray(other, dtype=float))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def reciprocal(self) -> "Jet":
        a = self.c
        if np.any(a[0] == 0):
            raise DomainError("division by zero in jet arithmetic")
        out = np.zeros_like(a)
        out[0] = 1.0 / a[0]
        for k in range(1, self.order + 1):
            acc = np.zeros_like(a[0])
            for i in range(1, k + 1):
                acc = acc + a[i] * out[k - i]
            out[k] = -acc / a[0]
        return Jet(out)

    def __pow__(self, p):
        if isinstance(p, Jet):
            if self.order == 0 or not np.any(p.c[1:]):
                return self ** p.c[0] if np.ndim(p.c[0]) == 0 else self.power(p.c[0])
            return (p * self.log()).exp()
        return self.power(p)

    def __rpow__(self, base):
        return (self * np.log(base)).exp()

    # composition --------------------------------------------------------
    def compose(self, fcoeffs) -> "Jet":
        """Evaluate ``f(self)`` given ``fcoeffs[k] = f^(k)(x0)/k!``."""
        n = self.order
        delta = Jet(np.concatenate([np.zeros_like(self.c[:1]), self.c[1:]]))
        out = Jet.constant(fcoeffs[0], n, np.shape(self.c[0]))
        powk = None
        for k in range(1, n + 1):
            powk = delta if powk is None else powk * delta
            out = out + powk * fcoeffs[k]
        return out

    def power(self, p) -> "Jet":
        p = np.asarray(p, dtype=float)
        if p.ndim == 0 and float(p).is_integer() and 0 <= p <= 12:
            out = Jet.constant(1.0, self.order, self.c.shape[1:])
            for _ in range(int(p)):
                out = out * self
            return out
        x0 = self.c[0]
        if np.any(x0 < 0) and not (p.ndim == 0 and float(p).is_integer()):
            raise DomainError("fractional power of a negative number")
        coeffs = []
        fall = np.ones_like(p)
        for k in range(self.order + 1):
            with np.errstate(divide="ignore", invalid="ignore"):
                coeffs.append(fall * x0 ** (p - k) / factorial(k))
            fall = fall * (p - k)
        return self.compose(coeffs)

    def sqrt(self) -> "Jet":
        if np.any(self.c[0] < 0):
            raise DomainError("sqrt of a negative number")
        return self.power(0.5)

    def exp(self) -> "Jet":
        e = np.exp(self.c[0])
        return self.compose([e / factorial(k) for k in range(self.order + 1)])

    def log(self) -> "Jet":
        x0 = self.c[0]
        if np.any(x0 <= 0):
            raise DomainError("log of a non-positive number")
        coeffs = [np.log(x0)]
        for k in range(1, self.order + 1):
            coeffs.append((-1.0) ** (k - 1) / (k * x0**k))
        return self.compose(coeffs)

    def _cyclic(self, funcs) -> "Jet":
        x0 = self.c[0]
        vals = [f(x0) for f in funcs]
        m = len(vals)
        return self.compose([vals[k % m] / factorial(k) for k in range(self.order + 1)])

    def sin(self) -> "Jet":
        return self._cyclic([np.sin, np.cos, lambda v: -np.sin(v), lambda v: -np.cos(v)])

    def cos(self) -> "Jet":
        return self._cyclic([np.cos, lambda v: -np.sin(v), lambda v: -np.cos(v), np.sin])

    def sinh(self) -> "Jet":
        return self._cyclic([np.sinh, np.cosh])

    def cosh(self) -> "Jet":
        return self._cyclic([np.cosh, np.sinh])

    def tanh(self) -> "Jet":
        # d^k tanh = P_k(T) with P_{k+1} = P_k'(T)(1 - T^2)
        T = np.tanh(self.c[0])
        poly = np.polynomial.Polynomial([0.0, 1.0])
        one_minus = np.polynomial.Polynomial([1.0, 0.0, -1.0])
        coeffs = []
        for k in range(self.order + 1):
            coeffs.append(poly(T) / factorial(k))
            poly = poly.deriv() * one_minus
        return self.compose(coeffs)

    def sech(self) -> "Jet":
        # d^k sech = sech * R_k(T) with R_{k+1} = -T R_k + (1 - T^2) R_k'
        x0 = self.c[0]
        T = np.tanh(x0)
        S = 1.0 / np.cosh(x0)
        poly = np.polynomial.Polynomial([1.0])
        t_poly = np.polynomial.Polynomial([0.0, 1.0])
        one_minus = np.polynomial.Polynomial([1.0, 0.0, -1.0])
        coeffs = []
        for k in range(self.order + 1):
            coeffs.append(S * poly(T) / factorial(k))
            poly = -t_poly * poly + one_minus * poly.deriv()
        return self.compose(coeffs)


def shift_series(coeffs: np.ndarray, x0, order: int) -> Jet:
    """Re-expand a polynomial ``sum c_k x^k`` about ``x0`` as a jet."""
    x0 = np.asarray(x0, dtype=float)
    poly = np.polynomial.Polynomial(coeffs)
    out = []
    for k in range(order + 1):
        out.append(poly(x0) / factorial(k))
        poly = poly.deriv()
    return Jet(np.array(out))


def revert_series(coeffs) -> np.ndarray:
    """Reversion of ``y = sum_{k>=1} a_k x^k`` (``a_0 = 0``, ``a_1 != 0``).

    Returns ``b`` with ``x = sum_{k>=1} b_k y^k`` to the same order.
    """
    a = np.asarray(coeffs, dtype=float)
    n = a.shape[0] - 1
    b = np.zeros(n + 1)
    b[1] = 1.0 / a[1]
    for k in range(2, n + 1):
        # coefficient of y^k in a(b(y)) with b_k unknown set to zero
        trial = Jet(b.copy())
        comp = Jet.constant(0.0, n)
        powj = None
        for j in range(1, n + 1):
            powj = trial if powj is None else powj * trial
            comp = comp + powj * a[j]
        b[k] = -comp.c[k] / a[1]
    return b
