import numpy as np
import pytest

from reqdecomp.csp import (
    Contracted,
    Csp,
    Infeasible,
    LowerBoundViolation,
    RealizableSets,
    build_csp,
    classify,
    outcome_to_json,
    propagate,
    within,
)
from reqdecomp.interval import Interval as I
from reqdecomp.interval import IntervalBox
from reqdecomp.specfile import bundled, load

from conftest import REFERENCE_RA, REFERENCE_RE


def contract_spec(name):
    s = load(bundled(name))
    csp = build_csp(s.design, s.realizable)
    assert isinstance(csp, Csp)
    return csp, propagate(csp)


def close(a, b, tol=1e-9):
    return abs(a.lo - b.lo) <= tol and abs(a.hi - b.hi) <= tol


def test_default_sets_contract_to_reference_domains():
    csp, out = contract_spec("cruise")
    assert isinstance(out, Contracted)
    d = out.domains
    for v in ("v", "vdot", "Fr", "F", "Fa", "omega"):
        assert close(d[v], REFERENCE_RE[v], 1e-6), v
    # the torque map peaks at 200, so the upper bound cannot stay at 220
    assert close(d["T"], I(120, 200), 1e-6)
    assert close(d["u"], I(-0.25 / 1.2, 2), 1e-9)
    assert isinstance(classify(out, REFERENCE_RA), Contracted)
    assert [t.variable for t in out.trace] == ["T", "v", "Fr", "u"]


def test_narrow_torque_is_a_lower_bound_violation():
    _, out = contract_spec("cruise_test2")
    assert isinstance(out, Contracted)
    assert close(out.domains["v"], I(0, 22.5), 1e-9)
    res = classify(out, REFERENCE_RA)
    assert isinstance(res, LowerBoundViolation)
    assert set(res.violations) == {"v", "Fa", "T", "omega"}
    assert outcome_to_json(res)["result"] == "lower_bound_violation"


def test_incompatible_suppliers_are_infeasible_at_fa():
    _, out = contract_spec("cruise_test3")
    assert isinstance(out, Infeasible) and out.first_empty == "Fa"
    assert out.trace[-1].variable == "Fa" and out.trace[-1].after.is_empty
    assert outcome_to_json(out, with_trace=True)["trace"][-1]["after"] == "empty"


def test_empty_intersection_between_suppliers(cruise_ds):
    box = {v: I(-1e4, 1e4) for v in cruise_ds.variable_ids}
    rs = RealizableSets.uniform(cruise_ds, box)
    per_block = {v: dict(s) for v, s in rs.per_block.items()}
    per_block["T"]["g4"] = I(0, 100)
    per_block["T"]["g6"] = I(150, 250)
    out = build_csp(cruise_ds, RealizableSets(per_block))
    assert isinstance(out, Infeasible) and out.first_empty == "T"


def test_fixed_point_is_idempotent():
    csp, out = contract_spec("cruise")
    again = propagate(Csp(out.domains, csp.params, csp.constraints))
    assert isinstance(again, Contracted) and again.domains == out.domains and again.trace == ()


@pytest.mark.parametrize("name", ["cruise", "cruise_test2"])
def test_contraction_keeps_every_solution(name):
    # grid oracle: walk the algebraic chain forward and keep points inside the start domains
    csp, out = contract_spec(name)
    d0 = csp.domains
    rng = np.random.default_rng(1)
    n = 200_000
    v = rng.uniform(d0["v"].lo, d0["v"].hi, n)
    u = rng.uniform(d0["u"].lo, d0["u"].hi, n)
    m = rng.uniform(900, 1100, n)
    wm = rng.uniform(365, 450, n)
    pts = {"v": v, "u": u}
    pts["omega"] = 10 * v
    pts["T"] = 200 * (1 - 0.4 * (pts["omega"] / wm - 1) ** 2)
    pts["F"] = 10 * u * pts["T"]
    pts["Fa"] = 0.4992 * v * v
    pts["Fr"] = m * 9.8 * 0.01
    pts["vdot"] = (pts["F"] - pts["Fr"] - pts["Fa"]) / m
    ok = np.ones(n, dtype=bool)
    for k, x in pts.items():
        ok &= (x >= d0[k].lo) & (x <= d0[k].hi)
    assert ok.sum() > 1000
    for k, x in pts.items():
        assert within(I(float(x[ok].min()), float(x[ok].max())), out.domains[k]), k


def test_within_slack():
    assert within(I(0, 1 + 1e-12), I(0, 1))
    assert not within(I(0, 1 + 1e-6), I(0, 1))
    big = I(0, 1e6)
    assert within(I(0, 1e6 + 1e-4), big)
    assert within(IntervalBox({"x": I(0, 1)})["x"], I(-1, 2))
