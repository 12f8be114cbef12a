"""End-to-end decomposition: spec in, subcontracts (or a diagnosis) out."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

from .contracts import ALL_TIME, check_primary_refinement
from .csp import Infeasible, LowerBoundViolation, build_csp, classify, format_trace, outcome_to_json, propagate, within
from .interval import Interval
from .optimizer import InfeasibleProblemError, build_problem, solve, verify_subcontracts
from .reach import ReachConfig, ReachDivergenceError, ReachResult, Window, mc_envelope, reach
from .specfile import ProblemSpec, SpecError, load

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_SPEC = 2
EXIT_REFINEMENT = 3
EXIT_SUPPLIER_CONFLICT = 4
EXIT_LOWER_BOUND = 5
EXIT_OPTIMIZATION = 6

NOT_COMPATIBLE = "some supplier(s) is not compatible"
CANNOT_PROVIDE = "some supplier(s) cannot provide the devices"
NO_TRADEOFF = "no subcontract set satisfies every band and block clause"

STAGES = ("validate", "reach", "refinement", "contraction", "optimization")


@dataclass(frozen=True)
class Flags:
    seed: int | None = None
    mc_trajectories: int | None = None
    step: float | None = None
    subdivision: int | None = None
    trace_propagation: bool = False


@dataclass(frozen=True)
class StageRecord:
    name: str
    ok: bool
    data: Mapping[str, Any]

    def to_json(self) -> dict:
        return {"stage": self.name, "ok": self.ok, **self.data}


@dataclass(frozen=True)
class PipelineReport:
    spec: str
    settings: Mapping[str, Any]
    stages: tuple[StageRecord, ...]
    diagnosis: str
    exit_code: int
    # in-memory results for figures and delimited output; not serialized
    reach_result: ReachResult | None = field(default=None, compare=False, repr=False)
    mc_result: ReachResult | None = field(default=None, compare=False, repr=False)

    def stage(self, name: str) -> StageRecord | None:
        return next((s for s in self.stages if s.name == name), None)

    def to_json(self) -> dict:
        return {
            "spec": self.spec,
            "settings": dict(self.settings),
            "stages": [s.to_json() for s in self.stages],
            "diagnosis": self.diagnosis,
            "exit_code": self.exit_code,
        }

    @staticmethod
    def from_json(obj: Mapping) -> "PipelineReport":
        stages = []
        for s in obj["stages"]:
            data = {k: v for k, v in s.items() if k not in ("stage", "ok")}
            stages.append(StageRecord(s["stage"], s["ok"], data))
        return PipelineReport(obj["spec"], dict(obj["settings"]), tuple(stages), obj["diagnosis"], obj["exit_code"])


def _plain(x):
    """JSON-ready copy; tuples become lists so a parse round trip is the identity."""
    return json.loads(json.dumps(x, allow_nan=False))


def _window_key(w: Window) -> str:
    return "all" if w == ALL_TIME else w.key


def _iv(iv: Interval):
    return iv.to_json()


def _reach_windows(spec: ProblemSpec) -> list[Window]:
    wins = {w for w, _ in spec.contract.output.windows if w != ALL_TIME}
    wins.update(spec.knobs.report_windows)
    return sorted(wins)


def _mc_check(r: ReachResult, mc: ReachResult, windows: list[Window]) -> dict:
    escapes = []
    for v in r.variables:
        if not within(mc.whole[v], r.whole[v]):
            escapes.append({"variable": v, "window": "all", "mc": _iv(mc.whole[v]), "reach": _iv(r.whole[v])})
        for w in windows:
            a, b = mc.windows[w][v], r.windows[w][v]
            if not within(a, b):
                escapes.append({"variable": v, "window": w.key, "mc": _iv(a), "reach": _iv(b)})
    return {
        "trajectories": int(getattr(mc, "n_samples", 0)),
        "contained": not escapes,
        "escapes": escapes,
        "whole": {v: _iv(iv) for v, iv in mc.whole.items()},
    }


def run_spec(spec: ProblemSpec, flags: Flags = Flags()) -> PipelineReport:
    """Run every stage on a loaded spec, stopping at the first failure."""
    k = spec.knobs
    step = flags.step if flags.step is not None else k.step
    sub = flags.subdivision if flags.subdivision is not None else k.subdivision
    seed = flags.seed if flags.seed is not None else k.seed
    n_mc = flags.mc_trajectories if flags.mc_trajectories is not None else k.mc_trajectories
    settings = {"step": step, "subdivision": sub, "subdivide_params": k.subdivide_params, "seed": seed, "mc_trajectories": n_mc}
    stages = [StageRecord("validate", True, {})]
    ds = replace(spec.design, step=step)

    def done(diagnosis: str, code: int, r=None, mc=None) -> PipelineReport:
        return PipelineReport(spec.name, settings, tuple(stages), diagnosis, code, r, mc)

    windows = _reach_windows(spec)
    t = time.perf_counter()
    try:
        r = reach(ds, windows, ReachConfig(step=step, subdivision=sub, subdivide_params=k.subdivide_params))
    except ReachDivergenceError as exc:
        stages.append(StageRecord("reach", False, {"error": str(exc)}))
        return done(str(exc), EXIT_REFINEMENT)
    log.info("reach: %.1f s", time.perf_counter() - t)
    data: dict[str, Any] = {
        "whole": {v: _iv(iv) for v, iv in r.whole.items()},
        "windows": {w.key: {v: _iv(iv) for v, iv in r.windows[w].items()} for w in windows},
    }
    mc = None
    if n_mc > 0:
        t = time.perf_counter()
        mc = mc_envelope(ds, n_mc, windows, seed=seed, step=step)
        log.info("monte carlo: %.1f s", time.perf_counter() - t)
        data["monte_carlo"] = _mc_check(r, mc, windows)
        if not data["monte_carlo"]["contained"]:
            log.warning("sampled trajectories leave the reachable-set enclosure")
    stages.append(StageRecord("reach", True, _plain(data)))

    verdict = check_primary_refinement(r, spec.contract, spec.enlarged_input)
    data = {
        "verdict": verdict.kind.value,
        "checks": [{"variable": v, "window": _window_key(w), "reach": _iv(iv)} for v, w, iv in verdict.reach_windows],
        "witnesses": [w.to_json() for w in verdict.witnesses],
    }
    stages.append(StageRecord("refinement", bool(verdict), _plain(data)))
    if not verdict:
        detail = "; ".join(f"{w.variable}: {w.detail}" for w in verdict.witnesses)
        return done(f"{verdict.remediation} ({detail})", EXIT_REFINEMENT, r, mc)

    csp = build_csp(ds, spec.realizable)
    outcome = csp if isinstance(csp, Infeasible) else propagate(csp)
    if not isinstance(outcome, Infeasible):
        outcome = classify(outcome, r)
    data = outcome_to_json(outcome, with_trace=flags.trace_propagation)
    stages.append(StageRecord("contraction", not isinstance(outcome, (Infeasible, LowerBoundViolation)), _plain(data)))
    if flags.trace_propagation:
        log.info("propagation trace:\n%s", format_trace(outcome.trace))
    if isinstance(outcome, Infeasible):
        where = f"; {outcome.witness}" if outcome.witness else ""
        return done(f"{NOT_COMPATIBLE}: the domain of {outcome.first_empty} is empty{where}", EXIT_SUPPLIER_CONFLICT, r, mc)
    if isinstance(outcome, LowerBoundViolation):
        names = ", ".join(outcome.violations)
        return done(f"{CANNOT_PROVIDE}: realizable sets too narrow for {names}", EXIT_LOWER_BOUND, r, mc)

    try:
        problem = build_problem(ds, r.whole, outcome.domains, spec.coefficients, spec.contract.output)
    except InfeasibleProblemError as exc:
        stages.append(StageRecord("optimization", False, {"error": str(exc)}))
        return done(f"{NO_TRADEOFF}: {exc}", EXIT_OPTIMIZATION, r, mc)
    t = time.perf_counter()
    res = solve(problem)
    log.info("optimization: %.1f s, %d sweeps", time.perf_counter() - t, res.sweeps)
    if not res.feasible:
        data = {"witnesses": [w.to_json() for w in res.witnesses]}
        stages.append(StageRecord("optimization", False, _plain(data)))
        detail = "; ".join(f"{w.variable}: {w.detail}" for w in res.witnesses)
        return done(f"{NO_TRADEOFF}: {detail}", EXIT_OPTIMIZATION, r, mc)
    subs = replace(res.subcontracts, level0_contract=(spec.contract.input, spec.contract.output.box()), level0_inputs=spec.enlarged_input)
    check = verify_subcontracts(subs, problem)
    variables = {}
    for v in problem.variables:
        variables[v] = {
            "level": 0 if v in problem.system_variables else 1,
            "RA": _iv(problem.ra[v]),
            "RE": _iv(problem.re[v]),
            "optimal": _iv(res.point[v]),
        }
    data = {
        "variables": variables,
        "subcontracts": subs.to_json(),
        "objective": res.objective,
        "start_objective": res.start_objective,
        "first_feasible_objective": res.feasible_start_objective,
        "restored_start": res.restored,
        "sweeps": res.sweeps,
        "verified": check.ok,
        "witnesses": [w.to_json() for w in check.witnesses],
    }
    stages.append(StageRecord("optimization", check.ok, _plain(data)))
    if not check.ok:
        return done(f"{NO_TRADEOFF}: " + "; ".join(w.detail for w in check.witnesses), EXIT_OPTIMIZATION, r, mc)
    return done("subcontracts found", EXIT_OK, r, mc)


def run(path: str | Path, flags: Flags = Flags()) -> PipelineReport:
    """Load the spec at ``path`` and run it; a bad spec yields exit code 2 rather than raising."""
    try:
        spec = load(path)
    except SpecError as exc:
        data = {"error": exc.message, "source": exc.source, "line": exc.line, "column": exc.column}
        return PipelineReport(Path(path).stem, {}, (StageRecord("validate", False, data),), f"spec error: {exc}", EXIT_SPEC)
    return run_spec(spec, flags)


# --------------------------------------------------------------------------
# rendering


def _fmt(iv) -> str:
    lo, hi = iv
    return f"[{lo:.6g}, {hi:.6g}]"


def _box_text(box: Mapping) -> str:
    return ", ".join(f"{v} ∈ {_fmt(iv)}" for v, iv in box.items()) or "none"


def emit_structured(r: PipelineReport) -> str:
    return json.dumps(r.to_json(), indent=2, allow_nan=False) + "\n"


def emit_text(r: PipelineReport) -> str:
    lines = [f"spec: {r.spec}"]
    if r.settings:
        lines.append("settings: " + ", ".join(f"{k}={v}" for k, v in r.settings.items()))
    for s in r.stages:
        lines.append("")
        lines.append(f"== {s.name}: {'ok' if s.ok else 'FAILED'}")
        d = s.data
        if s.name == "validate" and not s.ok:
            lines.append(f"  {d['source']}:{d['line']}:{d['column']}: {d['error']}")
        elif s.name == "reach" and s.ok:
            lines.append(f"  {'variable':<10} {'[0, T]':<28}" + "".join(f"{k:<28}" for k in d["windows"]))
            for v, iv in d["whole"].items():
                lines.append(f"  {v:<10} {_fmt(iv):<28}" + "".join(f"{_fmt(w[v]):<28}" for w in d["windows"].values()))
            if "monte_carlo" in d:
                m = d["monte_carlo"]
                state = "inside the enclosure" if m["contained"] else f"{len(m['escapes'])} escapes"
                lines.append(f"  sampled trajectories: {m['trajectories']}, {state}")
        elif s.name == "reach":
            lines.append(f"  {d['error']}")
        elif s.name == "refinement":
            for c in d["checks"]:
                lines.append(f"  {c['variable']} over {c['window']}: {_fmt(c['reach'])}")
            for w in d["witnesses"]:
                lines.append(f"  ! {w['variable']}: {w['detail']}")
        elif s.name == "contraction":
            if "domains" in d:
                for v, iv in d["domains"].items():
                    mark = "  !" if v in d.get("violations", ()) else ""
                    lines.append(f"  {v:<10} {_fmt(iv)}{mark}")
            if "first_empty" in d:
                lines.append(f"  first empty domain: {d['first_empty']}")
            if "witness" in d:
                lines.append(f"  {d['witness']}")
            for t in d.get("trace", ()):
                lines.append(f"  {t['step']:4d} {t['block']:>4} {t['variable']:>8}: {_fmt(t['before'])} -> {t['after'] if t['after'] == 'empty' else _fmt(t['after'])}")
        elif s.name == "optimization" and "subcontracts" in d:
            sc = d["subcontracts"]
            rows = []
            c0 = sc.get("level0_contract")
            if c0:
                rows.append(("Level 0 Contract", _box_text(c0["input"]), _box_text(c0["output"])))
            ref = sc["level0_refinement"]
            rows.append(("Level 0 Refinement", _box_text(ref.get("input", {})), _box_text(ref["output"])))
            for b, io in sc["level1"].items():
                rows.append((f"Level 1 Subcontract {b}", _box_text(io["input"]), _box_text(io["output"])))
            w = max(len(a) for a, _, _ in rows)
            for name, i, o in rows:
                lines.append(f"  {name:<{w}}  input: {i}")
                lines.append(f"  {'':<{w}}  output: {o}")
            lines.append("")
            lines.append(f"  {'variable':<10} {'RA':<28} {'RE':<28} optimal")
            for v, e in d["variables"].items():
                lines.append(f"  {v:<10} {_fmt(e['RA']):<28} {_fmt(e['RE']):<28} {_fmt(e['optimal'])}")
            lines.append(f"  objective {d['objective']:.6g} (midpoint {d['start_objective']:.6g}, first feasible {d['first_feasible_objective']:.6g}), {d['sweeps']} sweeps")
        elif s.name == "optimization":
            for w in d.get("witnesses", ()):
                lines.append(f"  ! {w['variable']}: {w['detail']}")
            if "error" in d:
                lines.append(f"  {d['error']}")
    lines.append("")
    lines.append(f"diagnosis: {r.diagnosis}")
    lines.append(f"exit code: {r.exit_code}")
    return "\n".join(lines) + "\n"


def emit_report(r: PipelineReport, fmt: str = "text") -> str:
    if fmt == "structured":
        return emit_structured(r)
    if fmt == "text":
        return emit_text(r)
    raise ValueError(f"unknown report format {fmt!r}")


def write_outputs(r: PipelineReport, outdir: str | Path, figures: bool = True) -> list[Path]:
    """Delimited envelopes, the structured report and (optionally) figures under ``outdir``."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / "report.json"]
    written[0].write_text(emit_structured(r))
    if r.reach_result is not None:
        p = out / "reach.csv"
        with p.open("w") as fh:
            r.reach_result.write_delimited(fh)
        written.append(p)
    if r.mc_result is not None:
        p = out / "monte_carlo.csv"
        with p.open("w") as fh:
            r.mc_result.write_delimited(fh)
        written.append(p)
    opt = r.stage("optimization")
    if opt is not None and "variables" in opt.data:
        p = out / "subcontracts.csv"
        rows = ["variable,level,ra_lo,ra_hi,re_lo,re_hi,opt_lo,opt_hi"]
        for v, e in opt.data["variables"].items():
            vals = [*e["RA"], *e["RE"], *e["optimal"]]
            rows.append(",".join([v, str(e["level"])] + [repr(float(x)) for x in vals]))
        p.write_text("\n".join(rows) + "\n")
        written.append(p)
    if figures and r.reach_result is not None:
        from .figures import render_all

        written += render_all(r, out)
    return written


__all__ = [
    "CANNOT_PROVIDE",
    "EXIT_LOWER_BOUND",
    "EXIT_OK",
    "EXIT_OPTIMIZATION",
    "EXIT_REFINEMENT",
    "EXIT_SPEC",
    "EXIT_SUPPLIER_CONFLICT",
    "Flags",
    "NOT_COMPATIBLE",
    "PipelineReport",
    "StageRecord",
    "emit_report",
    "run",
    "run_spec",
    "write_outputs",
]
