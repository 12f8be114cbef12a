import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from reqdecomp.interval import EMPTY, Interval, IntervalBox, IntervalError, UnboundedQuotientError, extended_div
from reqdecomp.ivec import IArr

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)


@st.composite
def intervals(draw):
    a, b = draw(finite), draw(finite)
    return Interval(min(a, b), max(a, b))


@st.composite
def member(draw, iv: Interval):
    t = draw(st.floats(min_value=0.0, max_value=1.0))
    x = iv.lo + t * (iv.hi - iv.lo)
    return min(max(x, iv.lo), iv.hi)


def exact_in(iv: Interval, q: Fraction) -> bool:
    return Fraction(iv.lo) <= q <= Fraction(iv.hi)


def test_add_endpoints():
    assert Interval(1, 2) + Interval(3, 4) == Interval(4, 6)


def test_mul_mixed_signs():
    assert Interval(-1, 2) * Interval(3, 4) == Interval(-4, 8)


def test_square_against_grid():
    sq = Interval(-2, 3).square()
    grid = np.linspace(-2, 3, 10_001) ** 2
    assert sq == Interval(0, 9)
    assert sq.lo <= grid.min() and grid.max() <= sq.hi


def test_contains_examples():
    assert Interval(20, 40).contains(Interval(21.97, 36.23))
    assert Interval(0, 1).contains(Interval(0, 1))
    assert not Interval(0, 1).contains(Interval(-0.1, 0.5))
    assert Interval(0, 1).contains(EMPTY)


def test_intersect_examples():
    assert Interval(0, 543.6).intersect(Interval(600, 1000)) is EMPTY
    assert Interval(0, 250).intersect(Interval(120, 200)) == Interval(120, 200)


def test_hull_examples():
    assert Interval(0, 1).hull(Interval(2, 3)) == Interval(0, 3)
    assert EMPTY.hull(Interval(2, 3)) == Interval(2, 3)
    assert Interval(-1, -0.5).hull(Interval(0.5, 1)) == Interval(-1, 1)


def test_empty_propagates():
    a = Interval(1, 2)
    for r in (a + EMPTY, EMPTY + a, a * EMPTY, EMPTY * a, a - EMPTY, -EMPTY, EMPTY.square()):
        assert r is EMPTY


def test_lo_above_hi_is_an_error():
    with pytest.raises(IntervalError):
        Interval(2, 1)


def test_division_through_zero():
    with pytest.raises(UnboundedQuotientError, match="unbounded quotient"):
        Interval(1, 2) / Interval(-1, 1)
    assert Interval(1, 2).div(Interval(-1, 1), universe=Interval(-10, 10)) == Interval(-10, 10)
    assert Interval(1, 2).div(Interval(0, 1), universe=Interval(-10, 10)) == Interval(1, 10)


def test_extended_division_pieces():
    assert extended_div(Interval(1, 2), Interval(-1, 1)) == [Interval(-math.inf, -1), Interval(1, math.inf)]
    assert extended_div(Interval(-1, 1), Interval(-1, 1)) == [Interval.entire()]


def test_outward_rounding_is_not_inward():
    third = Interval(1, 1) / Interval(3, 3)
    assert third.lo < third.hi
    assert Fraction(third.lo) < Fraction(1, 3) < Fraction(third.hi)
    tenth = Interval(0.1, 0.1) + Interval(0.2, 0.2)
    assert exact_in(tenth, Fraction(0.1) + Fraction(0.2))


def test_exact_results_are_not_widened():
    assert Interval(1, 2) + Interval(0.5, 0.25 + 0.5) == Interval(1.5, 2.75)
    assert Interval(3, 3) * Interval(4, 4) == Interval(12, 12)


def test_pow_int():
    assert Interval(-2, 3) ** 3 == Interval(-8, 27)
    assert Interval(-3, 2) ** 4 == Interval(0, 81)
    assert Interval(-3, -2) ** 2 == Interval(4, 9)
    assert Interval(5, 7) ** 0 == Interval(1, 1)


def test_json_round_trip():
    box = IntervalBox({"v": Interval(0, 45), "x": EMPTY})
    assert IntervalBox.from_json(box.to_json()) == box
    assert box.to_json() == {"v": [0.0, 45.0], "x": "empty"}
    assert box.is_empty


def test_box_set_operations():
    a = IntervalBox({"x": Interval(0, 2), "y": Interval(0, 1)})
    b = IntervalBox({"x": Interval(1, 3), "y": Interval(0, 1)})
    assert a.intersect(b) == IntervalBox({"x": Interval(1, 2), "y": Interval(0, 1)})
    assert a.hull(b) == IntervalBox({"x": Interval(0, 3), "y": Interval(0, 1)})
    assert a.hull(b).contains(a)
    assert not a.contains(b)
    assert a.intersect(IntervalBox({"x": Interval(5, 6)})).is_empty


OPS = {
    "add": (lambda a, b: a + b, lambda p, q: p + q),
    "sub": (lambda a, b: a - b, lambda p, q: p - q),
    "mul": (lambda a, b: a * b, lambda p, q: p * q),
}


@settings(max_examples=400, deadline=None)
@given(st.sampled_from(sorted(OPS)), intervals(), intervals(), st.data())
def test_binary_soundness(op, a, b, data):
    f, exact = OPS[op]
    x = data.draw(member(a))
    y = data.draw(member(b))
    assert exact_in(f(a, b), exact(Fraction(x), Fraction(y)))


@settings(max_examples=400, deadline=None)
@given(intervals(), intervals(), st.data())
def test_division_soundness(a, b, data):
    assume(b.lo > 1e-3 or b.hi < -1e-3)
    x = data.draw(member(a))
    y = data.draw(member(b))
    assert exact_in(a / b, Fraction(x) / Fraction(y))


@settings(max_examples=400, deadline=None)
@given(intervals(), st.integers(min_value=0, max_value=5), st.data())
def test_power_soundness(a, n, data):
    x = data.draw(member(a))
    assert exact_in(a ** n, Fraction(x) ** n)


@settings(max_examples=300, deadline=None)
@given(st.sampled_from(sorted(OPS)), intervals(), intervals(), intervals(), intervals())
def test_inclusion_monotonicity(op, a, b, c, d):
    f, _ = OPS[op]
    big_a, big_b = a.hull(c), b.hull(d)
    assert f(big_a, big_b).contains(f(a, b))


@settings(max_examples=300, deadline=None)
@given(intervals(), intervals())
def test_lattice_laws(a, b):
    assert a.intersect(b) == b.intersect(a)
    assert a.hull(b) == b.hull(a)
    assert a.hull(a.intersect(b)) == a
    assert a.intersect(a.hull(b)) == a
    assert a.hull(b).contains(a) and a.contains(a.intersect(b))


@settings(max_examples=200, deadline=None)
@given(intervals(), intervals(), st.data())
def test_vector_arithmetic_encloses_scalar(a, b, data):
    x = data.draw(member(a))
    y = data.draw(member(b))
    A, B = IArr(np.array([a.lo]), np.array([a.hi])), IArr(np.array([b.lo]), np.array([b.hi]))
    for got, want in ((A + B, Fraction(x) + Fraction(y)), (A * B, Fraction(x) * Fraction(y)), (A - B, Fraction(x) - Fraction(y))):
        assert Fraction(float(got.lo[0])) <= want <= Fraction(float(got.hi[0]))
