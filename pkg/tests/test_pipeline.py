import copy
import json
from pathlib import Path

import pytest
import yaml

from reqdecomp.cli import main
from reqdecomp.pipeline import (
    CANNOT_PROVIDE,
    EXIT_LOWER_BOUND,
    EXIT_OK,
    EXIT_OPTIMIZATION,
    EXIT_REFINEMENT,
    EXIT_SPEC,
    EXIT_SUPPLIER_CONFLICT,
    NOT_COMPATIBLE,
    Flags,
    PipelineReport,
    emit_report,
    emit_structured,
    run,
    write_outputs,
)

LOOP = Path(__file__).parent / "data" / "loop.yaml"
BASE = yaml.safe_load(LOOP.read_text())


def variant(tmp_path, name, patch):
    d = copy.deepcopy(BASE)
    patch(d)
    p = tmp_path / f"{name}.yaml"
    p.write_text(yaml.safe_dump(d))
    return p


@pytest.fixture(scope="module")
def ok_report():
    return run(LOOP)


def names(r):
    return [s.name for s in r.stages]


def test_success(ok_report):
    r = ok_report
    assert r.exit_code == EXIT_OK
    assert names(r) == ["validate", "reach", "refinement", "contraction", "optimization"]
    assert all(s.ok for s in r.stages)
    opt = r.stage("optimization").data
    assert opt["verified"] is True
    assert set(opt["subcontracts"]["level1"]) == {"g2", "g3", "g4"}
    assert {v: e["level"] for v, e in opt["variables"].items()} == {"x": 0, "xd": 1, "d": 1, "f": 1, "u": 0}
    assert r.stage("reach").data["monte_carlo"]["contained"]


def test_text_report_has_subcontract_rows(ok_report):
    text = emit_report(ok_report, "text")
    for b in ("g2", "g3", "g4"):
        assert f"Level 1 Subcontract {b}" in text
    assert "Level 0 Refinement" in text
    assert text.rstrip().endswith("exit code: 0")


def test_structured_round_trip(ok_report):
    doc = emit_structured(ok_report)
    back = PipelineReport.from_json(json.loads(doc))
    assert back == ok_report
    assert emit_structured(back) == doc


def test_structured_carries_provenance(ok_report):
    obj = json.loads(emit_report(ok_report, "structured"))
    row = obj["stages"][-1]["variables"]["x"]
    assert set(row) >= {"RA", "RE", "optimal"}


def test_deterministic(ok_report):
    assert emit_structured(run(LOOP)) == emit_structured(ok_report)


def test_flags_override_knobs():
    r = run(LOOP, Flags(step=0.1, subdivision=1, mc_trajectories=0, seed=5))
    assert r.settings == {"step": 0.1, "subdivision": 1, "subdivide_params": True, "seed": 5, "mc_trajectories": 0}
    assert "monte_carlo" not in r.stage("reach").data


def test_spec_error(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text(LOOP.read_text().replace("horizon: 10", "horizon: -1"))
    r = run(p)
    assert r.exit_code == EXIT_SPEC
    assert names(r) == ["validate"]
    d = r.stage("validate").data
    assert d["line"] is not None and d["column"] is not None


def test_refinement_failure_truncates(tmp_path):
    p = variant(tmp_path, "tight", lambda d: d["contract"]["outputs"][1]["box"].update(x=[0.9, 1.1]))
    r = run(p)
    assert r.exit_code == EXIT_REFINEMENT
    assert names(r) == ["validate", "reach", "refinement"]
    assert r.diagnosis.startswith("new design solution required")
    text = emit_report(r, "text")
    assert "contraction" not in text and "Level 1" not in text


def test_input_set_failure(tmp_path):
    p = variant(tmp_path, "narrow_in", lambda d: d["design"]["inputs"].update(r=[0.95, 1.1]))
    r = run(p)
    assert r.exit_code == EXIT_REFINEMENT
    assert r.diagnosis.startswith("new refined input set needs to be manually selected")


def test_reach_divergence(tmp_path):
    def blow_up(d):
        d["design"]["blocks"][1]["expr"] = "f - d + 10*x*x"
        d["coefficients"]["x"]["g2"] = 1

    r = run(variant(tmp_path, "blow", blow_up))
    assert r.exit_code == EXIT_REFINEMENT
    assert names(r) == ["validate", "reach"]
    assert not r.stage("reach").ok


def test_supplier_conflict(tmp_path):
    r = run(variant(tmp_path, "conflict", lambda d: d["realizable_sets"].update(d=[20, 30])))
    assert r.exit_code == EXIT_SUPPLIER_CONFLICT
    assert r.diagnosis.startswith(NOT_COMPATIBLE)
    assert r.stage("contraction").data["first_empty"] == "d"
    assert r.stage("optimization") is None


def test_lower_bound_violation(tmp_path):
    r = run(variant(tmp_path, "lower", lambda d: d["realizable_sets"].update(u=[-5, 1.0])), Flags(trace_propagation=True))
    assert r.exit_code == EXIT_LOWER_BOUND
    assert r.diagnosis.startswith(CANNOT_PROVIDE)
    data = r.stage("contraction").data
    assert "u" in data["violations"] and data["trace"]


def test_optimization_failure(tmp_path):
    r = run(variant(tmp_path, "opt", lambda d: d["realizable_sets"].update(xd=[-0.8, 2.21])))
    assert r.exit_code == EXIT_OPTIMIZATION
    assert r.stage("optimization").ok is False
    assert "xd" in r.diagnosis


def test_write_outputs(ok_report, tmp_path):
    paths = write_outputs(ok_report, tmp_path)
    got = {p.name for p in paths}
    assert got == {"report.json", "reach.csv", "monte_carlo.csv", "subcontracts.csv", "envelope.png", "window_boxes.png", "subcontracts.png"}
    header = (tmp_path / "reach.csv").read_text().splitlines()[0]
    assert header.startswith("t_lo,t_hi,x_lo,x_hi")
    rows = (tmp_path / "subcontracts.csv").read_text().splitlines()
    assert rows[0] == "variable,level,ra_lo,ra_hi,re_lo,re_hi,opt_lo,opt_hi" and len(rows) == 6


def test_cli(tmp_path, capsys):
    code = main(["--spec", str(LOOP), "--report", "structured", "--out", str(tmp_path), "--no-figures"])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert json.loads(out)["exit_code"] == 0
    assert (tmp_path / "report.json").read_text() == out
    assert not (tmp_path / "envelope.png").exists()


def test_cli_spec_error(tmp_path, capsys):
    p = tmp_path / "bad.yaml"
    p.write_text("contract: [")
    assert main(["--spec", str(p)]) == EXIT_SPEC
    assert "spec error" in capsys.readouterr().out
