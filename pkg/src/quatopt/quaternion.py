"""Quaternion scalars.

Components are always ordered ``(a, b, c, d)`` for ``q = a + i b + j c + k d``.
The array-level kernels at the bottom operate on stacks of component planes
(leading axis of length 4) and are shared with :mod:`quatopt.linalg`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Real

import numpy as np

__all__ = [
    "Quaternion",
    "ONE",
    "I",
    "J",
    "K",
    "mul",
    "conj",
    "modulus",
    "inverse",
    "rotate",
    "involution",
    "components_from_involutions",
]


@dataclass(frozen=True)
class Quaternion:
    """A single quaternion ``a + i b + j c + k d``."""

    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    @classmethod
    def from_array(cls, x) -> Quaternion:
        a, b, c, d = (float(v) for v in x)
        return cls(a, b, c, d)

    def to_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d])

    @property
    def real(self) -> float:
        return self.a

    @property
    def imag(self) -> Quaternion:
        return Quaternion(0.0, self.b, self.c, self.d)

    def is_pure(self, atol: float = 0.0) -> bool:
        return abs(self.a) <= atol

    def conj(self) -> Quaternion:
        return conj(self)

    def __abs__(self) -> float:
        return modulus(self)

    def inverse(self) -> Quaternion:
        return inverse(self)

    def __neg__(self) -> Quaternion:
        return Quaternion(-self.a, -self.b, -self.c, -self.d)

    def __add__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return Quaternion(self.a + other.a, self.b + other.b,
                          self.c + other.c, self.d + other.d)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return Quaternion(self.a - other.a, self.b - other.b,
                          self.c - other.c, self.d - other.d)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        q = _coerce(other)
        if q is None:
            return NotImplemented
        return mul(self, q)

    def __rmul__(self, other):
        q = _coerce(other)
        if q is None:
            return NotImplemented
        return mul(q, self)

    def __truediv__(self, other):
        if isinstance(other, Real):
            s = float(other)
            return Quaternion(self.a / s, self.b / s, self.c / s, self.d / s)
        q = _coerce(other)
        if q is None:
            return NotImplemented
        return mul(self, inverse(q))

    def isclose(self, other, atol: float = 1e-12) -> bool:
        other = _coerce(other)
        return bool(np.all(np.abs(self.to_array() - other.to_array()) <= atol))

    def __repr__(self) -> str:
        return f"Quaternion({self.a!r}, {self.b!r}, {self.c!r}, {self.d!r})"

    def __str__(self) -> str:
        return f"{self.a:g}{self.b:+g}i{self.c:+g}j{self.d:+g}k"


def _coerce(x):
    if isinstance(x, Quaternion):
        return x
    if isinstance(x, Real):
        return Quaternion(float(x))
    return None


ONE = Quaternion(1.0)
I = Quaternion(0.0, 1.0)
J = Quaternion(0.0, 0.0, 1.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)

_UNITS = {"1": ONE, "i": I, "j": J, "k": K}


def mul(p: Quaternion, q: Quaternion) -> Quaternion:
    """Hamilton product ``p q``."""
    return Quaternion.from_array(hamilton(p.to_array(), q.to_array()))


def conj(q: Quaternion) -> Quaternion:
    return Quaternion(q.a, -q.b, -q.c, -q.d)


def modulus(q: Quaternion) -> float:
    # hypot scales internally, so tiny components do not underflow
    return math.hypot(q.a, q.b, q.c, q.d)


def inverse(q: Quaternion) -> Quaternion:
    """``conj(q) / |q|^2``; raises ``ZeroDivisionError`` for ``q = 0``."""
    n2 = q.a * q.a + q.b * q.b + q.c * q.c + q.d * q.d
    if n2 == 0.0:
        raise ZeroDivisionError("inverse of the zero quaternion")
    return Quaternion(q.a / n2, -q.b / n2, -q.c / n2, -q.d / n2)


def rotate(q: Quaternion, mu: Quaternion) -> Quaternion:
    """Return ``q^mu = mu q mu^{-1}``, computed as ``mu q conj(mu) / |mu|^2``."""
    mu = _coerce(mu)
    n2 = mu.a * mu.a + mu.b * mu.b + mu.c * mu.c + mu.d * mu.d
    if n2 == 0.0:
        raise ZeroDivisionError("rotation axis mu must be nonzero")
    m = mu.to_array()
    r = hamilton(hamilton(m, q.to_array()), conj_planes(m)) / n2
    return Quaternion.from_array(r)


def involution(q: Quaternion, axis: str) -> Quaternion:
    """Canonical involution ``q^axis`` for ``axis`` in ``{"1", "i", "j", "k"}``.

    Sign-flip form of ``-axis q axis``; exact (no rounding).
    """
    return Quaternion.from_array(involution_planes(q.to_array(), axis))


def components_from_involutions(q, qi, qj, qk) -> tuple[float, float, float, float]:
    """Recover ``(q_a, q_b, q_c, q_d)`` from ``q`` and its three involutions."""
    s1 = q + qi + qj + qk
    s2 = q + qi - qj - qk
    s3 = q - qi + qj - qk
    s4 = q - qi - qj + qk
    qa = s1 / 4.0
    qb = mul(-I, s2) / 4.0
    qc = mul(-J, s3) / 4.0
    qd = mul(-K, s4) / 4.0
    return qa.a, qb.a, qc.a, qd.a


# --- component-plane kernels ------------------------------------------------

_INVOLUTION_SIGNS = {
    "1": (1.0, 1.0, 1.0, 1.0),
    "i": (1.0, 1.0, -1.0, -1.0),
    "j": (1.0, -1.0, 1.0, -1.0),
    "k": (1.0, -1.0, -1.0, 1.0),
}


def hamilton(x, y, op=np.multiply):
    """Hamilton product of two plane stacks ``x``, ``y`` (leading axis 4).

    ``op`` is the real bilinear kernel: ``np.multiply`` for entrywise
    products, ``np.matmul`` for matrix products.  Each output plane is
    accumulated in a fixed order.
    """
    xa, xb, xc, xd = x[0], x[1], x[2], x[3]
    ya, yb, yc, yd = y[0], y[1], y[2], y[3]
    a = op(xa, ya) - op(xb, yb) - op(xc, yc) - op(xd, yd)
    b = op(xa, yb) + op(xb, ya) + op(xc, yd) - op(xd, yc)
    c = op(xa, yc) - op(xb, yd) + op(xc, ya) + op(xd, yb)
    d = op(xa, yd) + op(xb, yc) - op(xc, yb) + op(xd, ya)
    return np.stack([a, b, c, d])


def conj_planes(x):
    out = np.array(x, dtype=float, copy=True)
    out[1:] *= -1.0
    return out


def involution_planes(x, axis: str):
    try:
        signs = _INVOLUTION_SIGNS[axis]
    except KeyError:
        raise ValueError(f"unknown involution axis {axis!r}") from None
    s = np.asarray(signs).reshape((4,) + (1,) * (np.ndim(x) - 1))
    return np.asarray(x, dtype=float) * s


def unit(axis: str) -> Quaternion:
    return _UNITS[axis]
