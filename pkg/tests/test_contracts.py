import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reqdecomp.contracts import (
    NamespaceError,
    NotConnectedError,
    OutputSpec,
    PrimaryVerdictKind,
    RelationalContract,
    SimulatedImplementation,
    StaticImplementation,
    check_chain_refinement,
    check_composability,
    check_primary_refinement,
    check_realizability,
    check_refinement,
    check_satisfiability,
    noncomposable_counterexample,
    proposition_suite,
)
from reqdecomp.interval import EMPTY
from reqdecomp.interval import Interval as I
from reqdecomp.interval import IntervalBox
from reqdecomp.reach import ReachResult, Window


def contract(inputs, outputs):
    return RelationalContract(IntervalBox(inputs), OutputSpec.static(outputs))


def fake_reach(t, v):
    """Reach result for a single variable ``v`` sampled on the grid ``t``."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=float)
    lo, hi = v[:, None] - 0.01, v[:, None] + 0.01
    whole = {"v": I(float(lo.min()), float(hi.max()))}
    return ReachResult(("v",), t, t, lo, hi, whole, {})


def test_refinement_examples():
    c = contract({"vref": I(34.5, 35.5)}, {"v": I(20, 40)})
    assert check_refinement(c, c)
    tighter = contract({"vref": I(34, 36)}, {"v": I(22, 37)})
    assert check_refinement(tighter, c)
    narrow_in = contract({"vref": I(34.8, 35.2)}, {"v": I(22, 37)})
    v = check_refinement(narrow_in, c)
    assert not v and v.witnesses[0].variable == "vref"
    loose_out = contract({"vref": I(34, 36)}, {"v": I(33, 41)})
    v = check_refinement(loose_out, c)
    assert not v and v.witnesses[0].variable == "v"


def test_refinement_respects_windows():
    c = RelationalContract(
        IntervalBox({"x": I(0, 1)}),
        OutputSpec(((Window(0, 100), IntervalBox({"v": I(20, 40)})), (Window(20, 100), IntervalBox({"v": I(33.5, 36.5)})))),
    )
    ok = RelationalContract(
        IntervalBox({"x": I(0, 1)}),
        OutputSpec(((Window(0, 20), IntervalBox({"v": I(21, 39)})), (Window(20, 100), IntervalBox({"v": I(34, 36)})))),
    )
    assert check_refinement(ok, c)
    # a single static box wide enough for the early window fails the late one
    bad = contract({"x": I(0, 1)}, {"v": I(21, 39)})
    v = check_refinement(bad, c)
    assert not v and v.witnesses[0].window == Window(20, 100)


def test_refinement_needs_matching_names():
    with pytest.raises(NamespaceError):
        check_refinement(contract({"x": I(0, 1)}, {"y": I(0, 1)}), contract({"z": I(0, 1)}, {"y": I(0, 1)}))


def test_empty_contracts_are_rejected():
    with pytest.raises(ValueError):
        contract({"x": I(0, 1)}, {"y": EMPTY})


def test_composability_and_realizability_examples():
    assert check_composability({"v": I(22, 36.23)}, {"v": I(0, 45), "T": I(0, 1)})
    v = check_composability({"v": I(22, 46)}, {"v": I(0, 45)})
    assert not v and v.witnesses[0].variable == "v"
    with pytest.raises(NotConnectedError):
        check_composability({"a": I(0, 1)}, {"b": I(0, 1)})
    assert check_realizability({"T": I(180, 200)}, {"T": I(0, 250)})
    assert not check_realizability({"T": I(180, 200)}, {"T": I(0, 180)})
    with pytest.raises(NamespaceError):
        check_realizability({"T": I(0, 1)}, {"F": I(0, 1)})


def test_satisfiability_static():
    c = contract({"x": I(0, 1)}, {"y": I(0, 2)})
    assert check_satisfiability(StaticImplementation({"y": "2*x"}), c, n_samples=200)
    res = check_satisfiability(StaticImplementation({"y": "50 + 0*x"}), c, n_samples=50)
    assert not res and res.counterexample.variable == "y"
    assert res.counterexample.value == I(50, 50)
    res = check_satisfiability(StaticImplementation({"y": "3*x"}), c, n_samples=200)
    assert not res and 3 * res.counterexample.input["x"] > 2


def test_satisfiability_of_the_cruise_plant(cruise_spec):
    # nominal plant with the level-0 contract and a mid-range mass and torque peak
    impl = SimulatedImplementation(cruise_spec.design, {"m": 1000.0, "wm": 400.0}, step=0.02)
    res = check_satisfiability(impl, cruise_spec.contract, n_samples=200)
    assert res.ok and res.n_checked >= 200


def test_primary_refinement_kinds(cruise_spec):
    t = np.linspace(0, 100, 1001)
    settle = 35 - 13 * np.exp(-t / 3)
    ok = check_primary_refinement(fake_reach(t, settle), cruise_spec.contract, cruise_spec.enlarged_input)
    assert ok.kind is PrimaryVerdictKind.OK and ok.remediation is None
    # overshoot above 36.5 after t = 20 asks for a new design
    slow = 35 + 2 * np.sin(t / 5)
    bad = check_primary_refinement(fake_reach(t, slow), cruise_spec.contract, cruise_spec.enlarged_input)
    assert bad.kind is PrimaryVerdictKind.NEED_NEW_DESIGN_SOLUTION
    assert bad.remediation == "new design solution required"
    assert any(w.window == Window(20, 100) for w in bad.witnesses)
    # enlarged input that misses part of the given one
    short = dict(cruise_spec.enlarged_input, vref=I(34.6, 36))
    v = check_primary_refinement(fake_reach(t, settle), cruise_spec.contract, short)
    assert v.kind is PrimaryVerdictKind.NEED_NEW_INPUT_SET
    assert v.remediation == "new refined input set needs to be manually selected"


def test_noncomposable_counterexample_breaks_refinement():
    inst = noncomposable_counterexample()
    assert check_chain_refinement(inst.top, [inst.f1, inst.f2])
    assert not check_composability(inst.f1.base.output.box(), inst.f2.base.input)
    assert check_refinement(inst.f1r.base, inst.f1.base)
    assert not check_chain_refinement(inst.top, [inst.f1r, inst.f2r])


def test_proposition_suite_small():
    rep = proposition_suite(seed=3, n_instances=60, n_samples=30)
    assert rep.ok, rep.composable_refinement.failures[:1] or rep.noncomposable_detection.failures[:1]
    assert rep.composable_refinement.passed == 60


def _iv(draw, lo=-10.0, hi=10.0):
    a, b = draw(st.floats(lo, hi)), draw(st.floats(lo, hi))
    return I(min(a, b), max(a, b))


def _widen(draw, iv):
    return I(iv.lo - draw(st.floats(0, 3)), iv.hi + draw(st.floats(0, 3)))


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_refinement_is_transitive_and_preserves_satisfaction(data):
    # c3 refines c2 refines c1 by construction: inputs grow, outputs shrink
    x1 = _iv(data.draw)
    y3 = _iv(data.draw)
    x2, y2 = _widen(data.draw, x1), _widen(data.draw, y3)
    x3, y1 = _widen(data.draw, x2), _widen(data.draw, y2)
    c1, c2, c3 = (contract({"x": x}, {"y": y}) for x, y in ((x1, y1), (x2, y2), (x3, y3)))
    assert check_refinement(c2, c1) and check_refinement(c3, c2) and check_refinement(c3, c1)
    # a constant implementation that satisfies the refined contract satisfies the original
    k = y3.lo + 0.5 * y3.width
    impl = StaticImplementation(lambda env: {"y": np.full(np.shape(env["x"]), k)})
    assert check_satisfiability(impl, c3, n_samples=20)
    assert check_satisfiability(impl, c1, n_samples=20)
