from dataclasses import replace

from reqdecomp.expr import parse
from reqdecomp.interval import Interval as I
from reqdecomp.interval import IntervalBox
from reqdecomp.network import (
    BlockKind,
    DesignSolution,
    Role,
    Variable,
    algebraic_order,
    classify_system_level,
    incidence,
    make_block,
    validate,
)


def _ds(blocks, variables, params=None, inputs=None):
    return DesignSolution(
        tuple(blocks),
        tuple(Variable(v) for v in variables),
        IntervalBox(params or {"p": I(1, 2)}),
        IntervalBox(inputs or {"a": I(0, 1)}),
    )


def test_cruise_network_is_valid(cruise_ds):
    assert validate(cruise_ds) == []


def test_cruise_system_level(cruise_ds):
    assert classify_system_level(cruise_ds) == ({"v", "u"}, {"g1", "g8"})


def test_cruise_incidence(cruise_ds):
    roles = incidence(cruise_ds)
    assert roles[("omega", "g6")] is Role.INPUT
    assert roles[("Fr", "g5")] is Role.NONE
    assert roles[("Fa", "g5")] is Role.OUTPUT
    assert roles[("v", "g5")] is Role.INPUT
    assert len(roles) == 8 * 8


def test_cruise_algebraic_order(cruise_ds):
    order = algebraic_order(cruise_ds)
    pos = {b: i for i, b in enumerate(order)}
    assert pos["g7"] < pos["g6"] < pos["g4"] < pos["g2"]
    assert pos["g5"] < pos["g2"] and pos["g3"] < pos["g2"]
    assert "g1" not in pos


def test_duplicate_producer():
    blocks = [
        make_block("g1", "algebraic", "x", expr=parse("a")),
        make_block("g2", "algebraic", "x", expr=parse("a + 1")),
    ]
    assert any("variable produced twice" in d for d in validate(_ds(blocks, ["x"])))


def test_algebraic_loop():
    blocks = [
        make_block("g1", "algebraic", "x", expr=parse("y + 1")),
        make_block("g2", "algebraic", "y", expr=parse("x + 1")),
    ]
    assert "algebraic loop" in validate(_ds(blocks, ["x", "y"]))


def test_loop_through_integrator_is_fine():
    blocks = [
        make_block("g1", "integrator", "x", derivative=parse("y"), initial=parse("a")),
        make_block("g2", "algebraic", "y", expr=parse("-p*x", ["p"]), params=["p"]),
    ]
    ds = _ds(blocks, ["x", "y"])
    assert validate(ds) == []
    assert classify_system_level(ds) == ({"x"}, {"g1"})


def test_dangling_identifiers_and_unhoused_params():
    blocks = [make_block("g1", "algebraic", "x", expr=parse("q*b", ["q"]))]
    diags = validate(_ds(blocks, ["x"]))
    assert any("unknown identifier b" in d for d in diags)
    assert any("parameter q not housed" in d for d in diags)


def test_purely_algebraic_network_has_no_system_level():
    blocks = [make_block("g1", "algebraic", "x", expr=parse("2*a"))]
    assert classify_system_level(_ds(blocks, ["x"])) == (set(), set())


def test_make_block_retags_params(cruise_ds):
    g3 = cruise_ds.block("g3")
    assert g3.kind is BlockKind.ALGEBRAIC
    assert cruise_ds.block_params(g3) == ["m"]
    assert cruise_ds.block_inputs(cruise_ds.block("g2")) == ["F", "Fa", "Fr"]
    assert cruise_ds.block_externals(cruise_ds.block("g8")) == ["v0", "vref"]


def test_initial_value_must_read_inputs_only(cruise_ds):
    g1 = cruise_ds.block("g1")
    bad = replace(g1, initial=parse("v + 1"))
    ds = replace(cruise_ds, blocks=tuple(bad if b.id == "g1" else b for b in cruise_ds.blocks))
    assert any("initial value reads non-inputs" in d for d in validate(ds))
