"""The bundled cruise specs through the whole pipeline.

The default spec runs once in full. The narrow-supplier variants share its
design, so they reuse that reachable set instead of recomputing it.
"""

import pytest

import reqdecomp.pipeline as pipeline
from reqdecomp.pipeline import EXIT_LOWER_BOUND, EXIT_OK, EXIT_SUPPLIER_CONFLICT, emit_report, run
from reqdecomp.specfile import bundled


@pytest.fixture(scope="module")
def full():
    return run(bundled("cruise"))


def rerun_with_cached_reach(name, cached):
    with pytest.MonkeyPatch.context() as mp:
        mp.setattr(pipeline, "reach", lambda *a, **k: cached)
        return run(bundled(name))


def test_default_spec_succeeds(full):
    assert full.exit_code == EXIT_OK, full.diagnosis
    assert full.stage("reach").data["monte_carlo"]["contained"]
    opt = full.stage("optimization").data
    assert opt["verified"] is True
    text = emit_report(full, "text")
    for b in ("g2", "g3", "g4", "g5", "g6", "g7"):
        assert f"Level 1 Subcontract {b}" in text
    assert set(opt["subcontracts"]["level0_refinement"]["output"]) == {"v", "u"}


def test_narrow_torque_supplier(full):
    r = rerun_with_cached_reach("cruise_test2", full.reach_result)
    assert r.exit_code == EXIT_LOWER_BOUND
    assert "cannot provide the devices" in r.diagnosis
    for v in ("v", "omega", "T", "Fa"):
        assert v in r.diagnosis


def test_incompatible_suppliers(full):
    r = rerun_with_cached_reach("cruise_test3", full.reach_result)
    assert r.exit_code == EXIT_SUPPLIER_CONFLICT
    assert "supplier(s) is not compatible" in r.diagnosis
    assert r.stage("contraction").data["first_empty"] == "Fa"
