"""Vectorized interval arrays and first-order interval automatic differentiation.

These back the reachability engine, which integrates many sub-boxes at once.
Rounding is outward by one to two ulps on every endpoint operation, which is
conservative but not tight; the scalar :class:`~reqdecomp.interval.Interval`
class is the tight reference.
"""

from __future__ import annotations

import numpy as np

from .interval import UnboundedQuotientError

_INF = np.inf


_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny


# Moving a round-to-nearest result by |x|*eps (at least one ulp) plus the
# smallest normal number always crosses the exact value; this is cheaper than
# np.nextafter and at most two ulps looser.
def _dn(x):
    t = np.abs(x)
    t *= -_EPS
    t -= _TINY
    t += x
    return t


def _upr(x):
    t = np.abs(x)
    t *= _EPS
    t += _TINY
    t += x
    return t


class IArr:
    """Array of closed intervals, stored as ``lo`` and ``hi`` float arrays."""

    __slots__ = ("lo", "hi")
    __array_priority__ = 100

    def __init__(self, lo, hi=None):
        lo = np.asarray(lo, dtype=float)
        self.lo = lo
        self.hi = lo if hi is None else np.asarray(hi, dtype=float)

    @staticmethod
    def const(c, shape=()):
        a = np.full(shape, float(c))
        return IArr(a, a)

    @property
    def shape(self):
        return np.broadcast_shapes(self.lo.shape, self.hi.shape)

    def mid(self):
        return 0.5 * self.lo + 0.5 * self.hi

    def rad(self):
        return _upr(0.5 * (self.hi - self.lo))

    def width(self):
        return self.hi - self.lo

    def mag(self):
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def __getitem__(self, idx):
        return IArr(self.lo[idx], self.hi[idx])

    def __neg__(self):
        return IArr(-self.hi, -self.lo)

    def __add__(self, o):
        o = _lift(o)
        return IArr(_dn(self.lo + o.lo), _upr(self.hi + o.hi))

    __radd__ = __add__

    def __sub__(self, o):
        o = _lift(o)
        return IArr(_dn(self.lo - o.hi), _upr(self.hi - o.lo))

    def __rsub__(self, o):
        return _lift(o) - self

    def __mul__(self, o):
        o = _lift(o)
        if o.lo is o.hi:
            return self._mul_point(o.lo)
        if self.lo is self.hi:
            return o._mul_point(self.lo)
        p1 = self.lo * o.lo
        p2 = self.lo * o.hi
        p3 = self.hi * o.lo
        p4 = self.hi * o.hi
        lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
        hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
        return IArr(_dn(lo), _upr(hi))

    __rmul__ = __mul__

    def _mul_point(self, c):
        a = self.lo * c
        b = self.hi * c
        return IArr(_dn(np.minimum(a, b)), _upr(np.maximum(a, b)))

    def __truediv__(self, o):
        o = _lift(o)
        if np.any((o.lo <= 0) & (o.hi >= 0)):
            raise UnboundedQuotientError()
        return self * IArr(_dn(1.0 / o.hi), _upr(1.0 / o.lo))

    def __rtruediv__(self, o):
        return _lift(o) / self

    def square(self):
        a = self.lo * self.lo
        b = self.hi * self.hi
        hi = np.maximum(a, b)
        lo = np.where((self.lo <= 0) & (self.hi >= 0), 0.0, np.minimum(a, b))
        return IArr(np.where(lo > 0, _dn(lo), lo), _upr(hi))

    def __pow__(self, n: int):
        if n == 0:
            return IArr.const(1.0, self.shape)
        if n == 1:
            return self
        if n == 2:
            return self.square()
        out = self
        for _ in range(n - 1):
            out = out * self
        if n % 2 == 0:
            # dependency-free even power: the result cannot be negative
            sq = self.square()
            even = sq
            for _ in range(n // 2 - 1):
                even = even * sq
            return IArr(np.maximum(out.lo, even.lo), np.minimum(out.hi, even.hi))
        return out

    def hull(self, o: "IArr") -> "IArr":
        return IArr(np.minimum(self.lo, o.lo), np.maximum(self.hi, o.hi))

    def subset_of(self, o: "IArr"):
        return (o.lo <= self.lo) & (self.hi <= o.hi)

    def __repr__(self) -> str:
        return f"IArr(lo={self.lo!r}, hi={self.hi!r})"


def _lift(o) -> IArr:
    if isinstance(o, IArr):
        return o
    a = np.asarray(o, dtype=float)
    return IArr(a, a)


def _midrad(a: IArr):
    m = 0.5 * a.lo + 0.5 * a.hi
    r = _upr(np.maximum(a.hi - m, m - a.lo))
    return m, r


def imatmul(a: IArr, b: IArr) -> IArr:
    """Interval matrix product over the last two axes (batched).

    Midpoint-radius form: the centre is a float matrix product and the radius
    also covers that product's rounding error.
    """
    ma, ra = _midrad(a)
    mb, rb = _midrad(b)
    n = ma.shape[-1]
    gamma = 2.0 * (n + 2) * _EPS
    amb = np.abs(mb)
    centre = ma @ mb
    rad = np.abs(ma) @ (rb + gamma * amb) + ra @ (amb + rb)
    rad = rad * (1.0 + gamma) + n * _TINY
    return IArr(_dn(centre - rad), _upr(centre + rad))


def imatvec(a: IArr, x: IArr) -> IArr:
    """Interval matrix-vector product ``a @ x`` over the last axes (batched)."""
    out = imatmul(a, IArr(x.lo[..., None], x.hi[..., None]))
    return IArr(out.lo[..., 0], out.hi[..., 0])


class ADI:
    """Interval value with an interval gradient (forward-mode AD).

    ``val`` has shape ``(batch,)`` and ``grad`` shape ``(batch, d)``;
    ``grad=None`` marks a constant and stands for a zero gradient.
    """

    __slots__ = ("val", "grad", "_d")
    __array_priority__ = 200

    def __init__(self, val: IArr, grad: IArr | None, d: int | None = None):
        self.val = val
        self.grad = grad
        self._d = d if grad is None else grad.lo.shape[-1]

    @staticmethod
    def lift_const(c, batch: int, d: int) -> "ADI":
        return ADI(IArr.const(c, (batch,)), None, d)

    def full_grad(self) -> IArr:
        if self.grad is not None:
            return self.grad
        z = np.zeros(self.val.lo.shape + (self._d,))
        return IArr(z, z)

    def _coerce(self, o) -> "ADI":
        if isinstance(o, ADI):
            return o
        return ADI(_lift(o), None, self._d)

    def __neg__(self):
        return ADI(-self.val, None if self.grad is None else -self.grad, self._d)

    def __add__(self, o):
        o = self._coerce(o)
        return ADI(self.val + o.val, _gsum(self.grad, o.grad), self._d)

    __radd__ = __add__

    def __sub__(self, o):
        o = self._coerce(o)
        g = o.grad
        return ADI(self.val - o.val, _gsum(self.grad, None if g is None else -g), self._d)

    def __rsub__(self, o):
        return self._coerce(o) - self

    def __mul__(self, o):
        o = self._coerce(o)
        v = self.val * o.val
        a = None if self.grad is None else self.grad * _col(o.val)
        b = None if o.grad is None else _col(self.val) * o.grad
        return ADI(v, _gsum(a, b), self._d)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = self._coerce(o)
        q = self.val / o.val
        if o.grad is None:
            if self.grad is None:
                return ADI(q, None, self._d)
            return ADI(q, self.grad / _col(o.val), self._d)
        g = _gsum(self.grad, -(_col(q) * o.grad))
        return ADI(q, g / _col(o.val), self._d)

    def __rtruediv__(self, o):
        return self._coerce(o) / self

    def __pow__(self, n: int):
        if n == 0:
            return ADI(IArr.const(1.0, self.val.lo.shape), None, self._d)
        if n == 1:
            return self
        v = self.val ** n
        if self.grad is None:
            return ADI(v, None, self._d)
        g = _col(self.val ** (n - 1) * float(n)) * self.grad
        return ADI(v, g, self._d)


def _gsum(a: IArr | None, b: IArr | None) -> IArr | None:
    if a is None:
        return b
    if b is None:
        return a
    return a + b


def _col(a: IArr) -> IArr:
    return IArr(a.lo[..., None], a.hi[..., None])
