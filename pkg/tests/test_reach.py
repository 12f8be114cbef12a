import io
import math
from pathlib import Path

import numpy as np
import pytest

from reqdecomp.csp import within
from reqdecomp.expr import parse
from reqdecomp.interval import Interval as I
from reqdecomp.interval import IntervalBox
from reqdecomp.network import DesignSolution, Variable, make_block
from reqdecomp.reach import (
    ReachConfig,
    ReachDivergenceError,
    Window,
    check_lower_bound,
    mc_envelope,
    reach,
)
from reqdecomp.specfile import load


def decay(horizon=4.0, step=0.01):
    # x' = -k x, x(0) = a; z = x*x rides along as an algebraic variable
    return DesignSolution(
        (
            make_block("g1", "integrator", "x", derivative=parse("xd"), initial=parse("a")),
            make_block("g2", "algebraic", "xd", expr=parse("0 - k*x", ["k"]), params=["k"]),
            make_block("g3", "algebraic", "z", expr=parse("x*x")),
        ),
        (Variable("x"), Variable("xd"), Variable("z")),
        IntervalBox({"k": I(0.5, 1.0)}),
        IntervalBox({"a": I(1.0, 2.0)}),
        horizon,
        step,
    )


def oscillator(horizon=10.0, step=0.01):
    # x'' = -x with x(0) in [0.9, 1.1], x'(0) = 0
    return DesignSolution(
        (
            make_block("g1", "integrator", "x", derivative=parse("y"), initial=parse("a")),
            make_block("g2", "integrator", "y", derivative=parse("yd"), initial=parse("0*a")),
            make_block("g3", "algebraic", "yd", expr=parse("0 - x")),
        ),
        (Variable("x"), Variable("y"), Variable("yd")),
        IntervalBox(),
        IntervalBox({"a": I(0.9, 1.1)}),
        horizon,
        step,
    )


@pytest.fixture(scope="module")
def decay_reach():
    return reach(decay(), [(1, 2), (3, 4)], ReachConfig(subdivision=2))


@pytest.mark.parametrize("t", [0.0, 0.5, 1.0, 2.0, 3.0, 4.0])
def test_decay_contains_exact_set(decay_reach, t):
    # at time t the exact set is [exp(-t), 2 exp(-t/2)]
    lo, hi = math.exp(-t), 2 * math.exp(-0.5 * t)
    got = decay_reach.hull_over("x", t, t)
    assert got.lo <= lo and hi <= got.hi
    # the mean-value form pays for the spread of dx/dk over each parameter piece
    assert got.width <= 1.5 * (hi - lo) + 0.05
    z = decay_reach.hull_over("z", t, t)
    assert z.lo <= lo * lo and hi * hi <= z.hi


def test_decay_tightens_with_subdivision():
    t = 4.0
    exact = 2 * math.exp(-0.5 * t) - math.exp(-t)
    widths = [reach(decay(), config=ReachConfig(subdivision=k)).hull_over("x", t, t).width for k in (1, 2, 8)]
    assert widths[0] > widths[1] > widths[2] >= exact
    assert widths[2] <= 1.15 * exact


def test_decay_windows(decay_reach):
    w = decay_reach.window("x", (1, 2))
    assert w.lo <= math.exp(-2) and 2 * math.exp(-0.5) <= w.hi
    assert decay_reach.whole["x"].contains(w)
    assert decay_reach.whole["x"].hi <= 2 + 1e-9


def test_oscillator_does_not_wrap():
    r = reach(oscillator(), config=ReachConfig(subdivision=1))
    for t in (math.pi / 2, math.pi, 2 * math.pi, 3 * math.pi):
        c = math.cos(t)
        got = r.hull_over("x", t, t)
        assert got.lo <= min(0.9 * c, 1.1 * c) and max(0.9 * c, 1.1 * c) <= got.hi
        assert got.width < 0.3


def test_mc_inside_reach():
    ds = decay()
    wins = [(1, 2), (3, 4)]
    r = reach(ds, wins, ReachConfig(subdivision=2))
    mc = mc_envelope(ds, 300, wins, seed=1)
    assert mc.n_samples == 300 + 4
    for v in r.variables:
        assert within(mc.whole[v], r.whole[v])
        for w in r.windows:
            assert within(mc.windows[w][v], r.windows[w][v])
    # per step as well
    j = r.variables.index("x")
    assert np.all(mc.lo[1:, j] >= r.lo[:, j] - 1e-9)
    assert np.all(mc.hi[1:, j] <= r.hi[:, j] + 1e-9)


def test_mc_is_seeded():
    ds = decay(horizon=1.0)
    a = mc_envelope(ds, 50, seed=3)
    b = mc_envelope(ds, 50, seed=3)
    assert np.array_equal(a.lo, b.lo) and np.array_equal(a.hi, b.hi)


def test_subdivision_tightens():
    ds = load(Path(__file__).parent / "data" / "loop.yaml").design
    w = Window(8, 10)
    coarse = reach(ds, [w], ReachConfig(step=0.05, subdivision=1)).windows[w]["x"]
    fine = reach(ds, [w], ReachConfig(step=0.05, subdivision=4)).windows[w]["x"]
    assert fine.width < coarse.width
    # per-name counts: unlisted names are not split
    mixed = reach(ds, [w], ReachConfig(step=0.05, subdivision={"r": 4, "x0": 4})).windows[w]["x"]
    assert fine.width <= mixed.width


def test_reach_is_deterministic():
    a = reach(decay(horizon=1.0))
    b = reach(decay(horizon=1.0))
    assert np.array_equal(a.lo, b.lo) and np.array_equal(a.hi, b.hi)


def test_finite_escape_diverges():
    ds = DesignSolution(
        (
            make_block("g1", "integrator", "x", derivative=parse("xd"), initial=parse("a")),
            make_block("g2", "algebraic", "xd", expr=parse("x*x")),
        ),
        (Variable("x"), Variable("xd")),
        IntervalBox(),
        IntervalBox({"a": I(1.0, 2.0)}),
        2.0,
        0.01,
    )
    with pytest.raises(ReachDivergenceError, match="blow-up"):
        reach(ds)


def test_lower_bound_check(decay_reach):
    assert check_lower_bound(decay_reach, {"x": I(-0.5, 3)})
    res = check_lower_bound(decay_reach, {"x": I(0.5, 3), "z": I(-1, 1)})
    assert not res
    assert {(w.variable, w.bound) for w in res.witnesses} == {("x", "lower"), ("z", "upper")}


def test_write_delimited(decay_reach):
    buf = io.StringIO()
    decay_reach.write_delimited(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t_lo,t_hi,x_lo,x_hi,xd_lo,xd_hi,z_lo,z_hi"
    assert len(lines) == 1 + len(decay_reach.t_lo)
