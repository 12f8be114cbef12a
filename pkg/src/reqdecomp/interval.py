"""Closed intervals and interval boxes with outward rounding.

Every endpoint is rounded in the safe direction: lower bounds toward -inf and
upper bounds toward +inf. For ``+``, ``-``, ``*``, ``/`` and ``sqrt`` the
rounding error of the nearest-rounded float result is recovered exactly with
error-free transformations, so the endpoints are the correctly rounded
directed results (exactly representable results are not widened). Where no
exact error term is available the result is widened by one ulp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

INF = math.inf

__all__ = [
    "EMPTY",
    "Interval",
    "IntervalBox",
    "IntervalError",
    "UnboundedQuotientError",
    "interval",
]


class IntervalError(ValueError):
    pass


class UnboundedQuotientError(IntervalError):
    def __init__(self, msg: str = "unbounded quotient"):
        super().__init__(msg)


# ---------------------------------------------------------------------------
# Directed rounding primitives
# ---------------------------------------------------------------------------

_SPLITTER = 134217729.0  # 2**27 + 1
_SPLIT_LIMIT = 1e290
_TINY = 1e-290


def _down(x: float) -> float:
    return math.nextafter(x, -INF)


def _up(x: float) -> float:
    return math.nextafter(x, INF)


def _two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _split(a: float) -> tuple[float, float]:
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def _two_prod(a: float, b: float) -> tuple[float, float] | None:
    """Dekker product: ``a*b == p + err`` exactly, or None when unsafe."""
    p = a * b
    if not math.isfinite(p) or abs(a) > _SPLIT_LIMIT or abs(b) > _SPLIT_LIMIT:
        return None
    # below the normal range the error term itself underflows (a product can even round to 0)
    if abs(p) < _TINY:
        return None
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def _bracket(r: float, err: float | None) -> tuple[float, float]:
    """Directed bounds of ``r + err`` where ``r`` is the rounded value."""
    if not math.isfinite(r):
        if math.isnan(r):
            raise IntervalError("NaN produced in interval arithmetic")
        return r, r
    if err is None:
        return _down(r), _up(r)
    if err > 0:
        return r, _up(r)
    if err < 0:
        return _down(r), r
    return r, r


def add_rd_ru(a: float, b: float) -> tuple[float, float]:
    s = a + b
    if not math.isfinite(s) or not (math.isfinite(a) and math.isfinite(b)):
        return _bracket(s, 0.0)
    return _bracket(*_two_sum(a, b))


def mul_rd_ru(a: float, b: float) -> tuple[float, float]:
    if a == 0.0 or b == 0.0:
        return 0.0, 0.0
    if not (math.isfinite(a) and math.isfinite(b)):
        return _bracket(a * b, 0.0)
    tp = _two_prod(a, b)
    if tp is None:
        return _bracket(a * b, None)
    return _bracket(*tp)


def div_rd_ru(a: float, b: float) -> tuple[float, float]:
    if b == 0.0:
        raise UnboundedQuotientError()
    if a == 0.0:
        return 0.0, 0.0
    if not math.isfinite(a) or not math.isfinite(b):
        return _bracket(a / b, 0.0)
    q = a / b
    tp = _two_prod(q, b)
    if tp is None or not math.isfinite(q):
        return _bracket(q, None)
    p, e = tp
    # sign(a - q*b) is exact: a - p is exact (Sterbenz) and the final
    # subtraction preserves sign.
    r = (a - p) - e
    if r == 0.0:
        return q, q
    return _bracket(q, 1.0 if (r > 0) == (b > 0) else -1.0)


def sqrt_rd_ru(x: float) -> tuple[float, float]:
    if x < 0:
        raise IntervalError("sqrt of negative number")
    if x == 0.0 or x == INF:
        return x, x
    s = math.sqrt(x)
    tp = _two_prod(s, s)
    if tp is None:
        return _bracket(s, None)
    p, e = tp
    r = (x - p) - e
    return _bracket(s, r)


def pow_rd_ru(x: float, n: int) -> tuple[float, float]:
    """Directed bounds of ``x**n`` for an integer ``n >= 0`` by repeated products."""
    if n == 0:
        return 1.0, 1.0
    lo, hi = x, x
    for _ in range(n - 1):
        lo, hi = _imul_endpoints(lo, hi, x, x)
    return lo, hi


def _imul_endpoints(alo: float, ahi: float, blo: float, bhi: float) -> tuple[float, float]:
    cands = [mul_rd_ru(p, q) for p in (alo, ahi) for q in (blo, bhi)]
    return min(c[0] for c in cands), max(c[1] for c in cands)


# ---------------------------------------------------------------------------
# Interval
# ---------------------------------------------------------------------------


def _as_interval(x: "Interval | float | int") -> "Interval":
    if isinstance(x, Interval):
        return x
    if isinstance(x, (int, float)):
        return Interval(float(x), float(x))
    return NotImplemented


@dataclass(frozen=True, slots=True)
class Interval:
    """Closed interval ``[lo, hi]``; infinite endpoints are allowed.

    The empty set is the distinguished value :data:`EMPTY`; constructing an
    interval with ``lo > hi`` is an error rather than a silent encoding.
    """

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if type(self) is Interval:
            if math.isnan(self.lo) or math.isnan(self.hi):
                raise IntervalError("interval endpoints must not be NaN")
            if self.lo > self.hi:
                raise IntervalError(f"lo > hi in Interval({self.lo}, {self.hi}); use EMPTY")
            object.__setattr__(self, "lo", float(self.lo))
            object.__setattr__(self, "hi", float(self.hi))

    # -- constructors -----------------------------------------------------
    @staticmethod
    def point(x: float) -> "Interval":
        return Interval(x, x)

    @staticmethod
    def entire() -> "Interval":
        return Interval(-INF, INF)

    # -- predicates / measures ---------------------------------------------
    @property
    def is_empty(self) -> bool:
        return False

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        if math.isinf(self.lo) or math.isinf(self.hi):
            if self.lo == -INF and self.hi == INF:
                return 0.0
            return self.lo if math.isinf(self.hi) else self.hi
        return 0.5 * self.lo + 0.5 * self.hi

    @property
    def mag(self) -> float:
        return max(abs(self.lo), abs(self.hi))

    def contains(self, other: "Interval | float") -> bool:
        """True iff ``other`` is a subset of (or a point inside) this interval."""
        if isinstance(other, Interval):
            if other.is_empty:
                return True
            return self.lo <= other.lo and other.hi <= self.hi
        return self.lo <= other <= self.hi

    def __contains__(self, x: float) -> bool:
        return self.contains(x)

    def intersect(self, other: "Interval") -> "Interval":
        if other.is_empty:
            return EMPTY
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo > hi:
            return EMPTY
        return Interval(lo, hi)

    def hull(self, other: "Interval") -> "Interval":
        if other.is_empty:
            return self
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def widen(self, eps: float) -> "Interval":
        return Interval(self.lo - eps, self.hi + eps)

    # -- arithmetic ---------------------------------------------------------
    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __add__(self, other):
        other = _as_interval(other)
        if other is NotImplemented:
            return other
        if other.is_empty:
            return EMPTY
        return Interval(add_rd_ru(self.lo, other.lo)[0], add_rd_ru(self.hi, other.hi)[1])

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_interval(other)
        if other is NotImplemented:
            return other
        if other.is_empty:
            return EMPTY
        return Interval(add_rd_ru(self.lo, -other.hi)[0], add_rd_ru(self.hi, -other.lo)[1])

    def __rsub__(self, other):
        return _as_interval(other) - self

    def __mul__(self, other):
        other = _as_interval(other)
        if other is NotImplemented:
            return other
        if other.is_empty:
            return EMPTY
        return Interval(*_imul_endpoints(self.lo, self.hi, other.lo, other.hi))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_interval(other)
        if other is NotImplemented:
            return other
        return self.div(other)

    def __rtruediv__(self, other):
        return _as_interval(other).div(self)

    def div(self, other: "Interval", universe: "Interval | None" = None) -> "Interval":
        """Quotient ``self / other``.

        When ``0`` lies in ``other`` the quotient set is unbounded; it is then
        clipped to ``universe`` (hull of the admissible pieces) or, without a
        universe, :class:`UnboundedQuotientError` is raised.
        """
        if other.is_empty:
            return EMPTY
        if other.lo > 0 or other.hi < 0:
            cands = [div_rd_ru(p, q) for p in (self.lo, self.hi) for q in (other.lo, other.hi)]
            return Interval(min(c[0] for c in cands), max(c[1] for c in cands))
        if universe is None:
            raise UnboundedQuotientError()
        out = EMPTY
        for piece in extended_div(self, other):
            out = out.hull(piece.intersect(universe))
        return out

    def square(self) -> "Interval":
        lo2 = mul_rd_ru(self.lo, self.lo)
        hi2 = mul_rd_ru(self.hi, self.hi)
        if self.lo >= 0:
            return Interval(lo2[0], hi2[1])
        if self.hi <= 0:
            return Interval(hi2[0], lo2[1])
        return Interval(0.0, max(lo2[1], hi2[1]))

    def __pow__(self, n: int) -> "Interval":
        return self.pow_int(n)

    def pow_int(self, n: int) -> "Interval":
        if not isinstance(n, int) or n < 0:
            raise IntervalError("exponent must be a non-negative integer")
        if n == 0:
            return Interval(1.0, 1.0)
        if n == 1:
            return self
        if n == 2:
            return self.square()
        plo = pow_rd_ru(self.lo, n)
        phi = pow_rd_ru(self.hi, n)
        if n % 2 == 1:
            return Interval(plo[0], phi[1])
        if self.lo >= 0:
            return Interval(plo[0], phi[1])
        if self.hi <= 0:
            return Interval(phi[0], plo[1])
        return Interval(0.0, max(plo[1], phi[1]))

    def sqrt(self) -> "Interval":
        lo = max(self.lo, 0.0)
        if self.hi < 0:
            return EMPTY
        return Interval(sqrt_rd_ru(lo)[0], sqrt_rd_ru(self.hi)[1])

    # -- serialization -------------------------------------------------------
    def to_json(self):
        return [self.lo, self.hi]

    @staticmethod
    def from_json(obj) -> "Interval":
        if obj == "empty":
            return EMPTY
        if isinstance(obj, (list, tuple)) and len(obj) == 2:
            return Interval(float(obj[0]), float(obj[1]))
        raise IntervalError(f"cannot read interval from {obj!r}")

    def __repr__(self) -> str:
        return f"[{self.lo!r}, {self.hi!r}]"

    def __iter__(self) -> Iterator[float]:
        yield self.lo
        yield self.hi


class _Empty(Interval):
    """The empty interval. Absorbing for arithmetic, identity for hull."""

    _instance: "_Empty | None" = None

    def __new__(cls):
        if cls._instance is None:
            inst = object.__new__(cls)
            object.__setattr__(inst, "lo", math.nan)
            object.__setattr__(inst, "hi", math.nan)
            cls._instance = inst
        return cls._instance

    def __init__(self) -> None:
        pass

    def __reduce__(self):
        return (_Empty, ())

    @property
    def is_empty(self) -> bool:
        return True

    @property
    def width(self) -> float:
        return 0.0

    @property
    def mid(self) -> float:
        raise IntervalError("empty interval has no midpoint")

    @property
    def mag(self) -> float:
        return 0.0

    def contains(self, other) -> bool:
        if isinstance(other, Interval):
            return other.is_empty
        return False

    def intersect(self, other):
        return self

    def hull(self, other):
        return other

    def widen(self, eps):
        return self

    def _absorb(self, *args, **kwargs):
        return self

    __neg__ = _absorb
    __add__ = __radd__ = __sub__ = __rsub__ = _absorb
    __mul__ = __rmul__ = __truediv__ = __rtruediv__ = _absorb
    div = square = pow_int = __pow__ = sqrt = _absorb

    def to_json(self):
        return "empty"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("reqdecomp.EMPTY")

    def __repr__(self) -> str:
        return "EMPTY"

    def __iter__(self):
        raise IntervalError("empty interval has no endpoints")


EMPTY: Interval = _Empty()


def interval(lo: float, hi: float | None = None) -> Interval:
    """Shorthand constructor; ``interval(x)`` is the degenerate interval ``[x, x]``."""
    return Interval(lo, lo if hi is None else hi)


def extended_div(num: Interval, den: Interval) -> list[Interval]:
    """Pieces of ``{x/y : x in num, y in den, y != 0}`` closed by hull.

    Returns zero, one or two intervals (possibly unbounded). Used by the
    backward projection of products, where the divisor may straddle zero.
    """
    if num.is_empty or den.is_empty:
        return []
    if den.lo > 0 or den.hi < 0:
        return [num.div(den)]
    if num.lo <= 0 <= num.hi:
        return [Interval.entire()]
    if den.lo == 0 and den.hi == 0:
        return []
    pieces: list[Interval] = []
    if num.hi < 0:
        if den.hi > 0:
            pieces.append(Interval(-INF, div_rd_ru(num.hi, den.hi)[1]))
        if den.lo < 0:
            pieces.append(Interval(div_rd_ru(num.hi, den.lo)[0], INF))
    else:  # num.lo > 0
        if den.lo < 0:
            pieces.append(Interval(-INF, div_rd_ru(num.lo, den.lo)[1]))
        if den.hi > 0:
            pieces.append(Interval(div_rd_ru(num.lo, den.hi)[0], INF))
    return pieces


def nth_root_bounds(x: Interval, n: int) -> Interval:
    """Enclosure of ``{r >= 0 : r**n in x}`` for ``x`` clipped to ``[0, inf]``."""
    x = x.intersect(Interval(0.0, INF))
    if x.is_empty:
        return EMPTY
    if n == 2:
        return x.sqrt()

    def root_down(v: float) -> float:
        if v in (0.0, INF):
            return v
        r = v ** (1.0 / n)
        for _ in range(4):
            r = _down(r)
        return max(r, 0.0)

    def root_up(v: float) -> float:
        if v in (0.0, INF):
            return v
        r = v ** (1.0 / n)
        for _ in range(4):
            r = _up(r)
        return r

    return Interval(root_down(x.lo), root_up(x.hi))


# ---------------------------------------------------------------------------
# IntervalBox
# ---------------------------------------------------------------------------


class IntervalBox(Mapping[str, Interval]):
    """Immutable named product of intervals.

    A box is empty iff any component is empty. Set operations are
    component-wise; containment between boxes with different names raises
    ``KeyError`` for the missing component.
    """

    __slots__ = ("_items",)

    def __init__(self, items: Mapping[str, Interval] | Iterable[tuple[str, Interval]] = ()):
        data = dict(items)
        for k, v in data.items():
            if not isinstance(v, Interval):
                data[k] = Interval.from_json(v) if not isinstance(v, (int, float)) else interval(v)
        self._items = MappingProxyType(data)

    def __getitem__(self, key: str) -> Interval:
        return self._items[key]

    def __iter__(self):
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v!r}" for k, v in self._items.items())
        return f"IntervalBox({inner})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntervalBox):
            return NotImplemented
        return dict(self._items) == dict(other._items)

    def __hash__(self):
        return hash(tuple(sorted((k, v.to_json() if not v.is_empty else "e") for k, v in self._items.items())))

    @property
    def is_empty(self) -> bool:
        return any(v.is_empty for v in self._items.values())

    def contains(self, other: "IntervalBox") -> bool:
        """True iff ``other`` lies inside this box on every component of ``other``."""
        if other.is_empty:
            return True
        return all(self[k].contains(v) for k, v in other.items())

    def intersect(self, other: "IntervalBox") -> "IntervalBox":
        keys = list(self) + [k for k in other if k not in self._items]
        out = {}
        for k in keys:
            if k in self._items and k in other:
                out[k] = self[k].intersect(other[k])
            else:
                out[k] = self[k] if k in self._items else other[k]
        return IntervalBox(out)

    def hull(self, other: "IntervalBox") -> "IntervalBox":
        keys = list(self) + [k for k in other if k not in self._items]
        out = {}
        for k in keys:
            a = self._items.get(k, EMPTY)
            b = other.get(k, EMPTY)
            out[k] = a.hull(b)
        return IntervalBox(out)

    def replace(self, **changes: Interval) -> "IntervalBox":
        data = dict(self._items)
        data.update(changes)
        return IntervalBox(data)

    def updated(self, changes: Mapping[str, Interval]) -> "IntervalBox":
        data = dict(self._items)
        data.update(changes)
        return IntervalBox(data)

    def subset(self, names: Iterable[str]) -> "IntervalBox":
        return IntervalBox((n, self[n]) for n in names)

    def to_json(self) -> dict:
        return {k: v.to_json() for k, v in self._items.items()}

    @staticmethod
    def from_json(obj: Mapping) -> "IntervalBox":
        return IntervalBox((k, Interval.from_json(v)) for k, v in obj.items())
