"""Problem-spec files: YAML documents checked against a JSON schema.

Errors carry the file, line and column of the offending node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import jsonschema
import yaml

from .contracts import OutputSpec, RelationalContract
from .csp import RealizableSets
from .expr import ExprSyntaxError, parse
from .interval import Interval, IntervalBox
from .network import Block, DesignSolution, Role, Variable, incidence, make_block, validate
from .reach import Window

_INTERVAL = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_BOX = {"type": "object", "additionalProperties": _INTERVAL}

SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "requirement decomposition problem",
    "type": "object",
    "required": ["contract", "design", "realizable_sets", "coefficients"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "base": {"type": "string"},
        "contract": {
            "type": "object",
            "required": ["inputs", "outputs"],
            "additionalProperties": False,
            "properties": {
                "inputs": _BOX,
                "outputs": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "required": ["box"],
                        "additionalProperties": False,
                        "properties": {"window": _INTERVAL, "box": _BOX},
                    },
                },
            },
        },
        "design": {
            "type": "object",
            "required": ["variables", "blocks", "params", "inputs"],
            "additionalProperties": False,
            "properties": {
                "variables": {
                    "type": "array",
                    "items": {
                        "oneOf": [
                            {"type": "string"},
                            {
                                "type": "object",
                                "required": ["id"],
                                "additionalProperties": False,
                                "properties": {"id": {"type": "string"}, "unit": {"type": "string"}},
                            },
                        ]
                    },
                },
                "params": _BOX,
                "inputs": _BOX,
                "horizon": {"type": "number", "exclusiveMinimum": 0},
                "blocks": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "required": ["id", "output"],
                        "additionalProperties": False,
                        "properties": {
                            "id": {"type": "string"},
                            "kind": {"enum": ["algebraic", "integrator", "controller"]},
                            "output": {"type": "string"},
                            "expr": {"type": "string"},
                            "derivative": {"type": "string"},
                            "initial": {"type": "string"},
                            "state": {"type": "string"},
                        },
                    },
                },
            },
        },
        "realizable_sets": {
            "type": "object",
            "additionalProperties": {"oneOf": [_INTERVAL, _BOX]},
        },
        "coefficients": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "additionalProperties": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "knobs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "step": {"type": "number", "exclusiveMinimum": 0},
                "subdivision": {
                    "oneOf": [
                        {"type": "integer", "minimum": 1},
                        {"type": "object", "additionalProperties": {"type": "integer", "minimum": 1}},
                    ]
                },
                "subdivide_params": {"type": "boolean"},
                "mc_trajectories": {"type": "integer", "minimum": 0},
                "seed": {"type": "integer"},
                "report_windows": {"type": "array", "items": _INTERVAL},
            },
        },
    },
}


class SpecError(ValueError):
    def __init__(self, message: str, source: str = "<spec>", line: int | None = None, column: int | None = None):
        self.message = message
        self.source = source
        self.line = line
        self.column = column
        super().__init__(str(self))

    def __str__(self) -> str:
        if self.line is None:
            return f"{self.source}: {self.message}"
        return f"{self.source}:{self.line}:{self.column}: {self.message}"


@dataclass(frozen=True)
class Knobs:
    step: float = 0.01
    # pieces per uncertain input or parameter; a mapping gives per-name counts (unlisted names are not split)
    subdivision: int | Mapping[str, int] = 4
    subdivide_params: bool = True
    mc_trajectories: int = 1000
    seed: int = 0
    report_windows: tuple[Window, ...] = ()


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    contract: RelationalContract
    design: DesignSolution
    realizable: RealizableSets
    coefficients: Mapping[tuple[str, str], float]
    knobs: Knobs = field(default_factory=Knobs)
    source: str = "<spec>"

    @property
    def enlarged_input(self) -> IntervalBox:
        return self.design.external_inputs


# --------------------------------------------------------------------------
# YAML with positions


class _Doc:
    """Plain data plus a map from key paths to (line, column), both 1-based."""

    def __init__(self, source: str):
        self.source = source
        self.marks: dict[tuple, tuple[int, int]] = {}

    def build(self, node: yaml.Node, path: tuple = ()) -> Any:
        self.marks[path] = (node.start_mark.line + 1, node.start_mark.column + 1)
        if isinstance(node, yaml.MappingNode):
            out = {}
            for k, v in node.value:
                key = self.build(k, path + ("<key>",))
                if not isinstance(key, str):
                    raise self.error("mapping keys must be strings", path)
                if key in out:
                    raise SpecError(f"duplicate key {key!r}", self.source, k.start_mark.line + 1, k.start_mark.column + 1)
                out[key] = self.build(v, path + (key,))
            return out
        if isinstance(node, yaml.SequenceNode):
            return [self.build(v, path + (i,)) for i, v in enumerate(node.value)]
        return yaml.safe_load(yaml.serialize(node)) if node.tag != "tag:yaml.org,2002:str" else node.value

    def error(self, message: str, path: tuple) -> SpecError:
        p = tuple(path)
        while p and p not in self.marks:
            p = p[:-1]
        line, col = self.marks.get(p, (None, None))
        return SpecError(message, self.source, line, col)


def _compose(text: str, source: str) -> tuple[dict, _Doc]:
    doc = _Doc(source)
    try:
        node = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark else None
        col = mark.column + 1 if mark else None
        raise SpecError(f"YAML syntax: {getattr(exc, 'problem', exc)}", source, line, col) from None
    if node is None:
        raise SpecError("empty spec", source)
    data = doc.build(node)
    if not isinstance(data, dict):
        raise SpecError("top level must be a mapping", source, 1, 1)
    return data, doc


def _iv(doc: _Doc, value, path: tuple) -> Interval:
    lo, hi = float(value[0]), float(value[1])
    if math.isnan(lo) or math.isnan(hi) or lo > hi:
        raise doc.error(f"interval [{value[0]}, {value[1]}] has lo > hi", path)
    return Interval(lo, hi)


def _box(doc: _Doc, value: Mapping, path: tuple) -> IntervalBox:
    return IntervalBox((k, _iv(doc, v, path + (k,))) for k, v in value.items())


def _expr(doc: _Doc, text: str, params, path: tuple):
    try:
        return parse(text, params)
    except ExprSyntaxError as exc:
        line, col = doc.marks.get(path, (None, None))
        raise SpecError(f"expression: {exc}", doc.source, line, None if col is None else col + exc.position) from None


def loads(text: str, source: str = "<spec>", base_dir: Path | None = None) -> ProblemSpec:
    data, doc = _compose(text, source)
    docs = {k: doc for k in data}
    if "base" in data:
        base_path = Path(data["base"])
        if not base_path.is_absolute():
            base_path = (base_dir or Path(".")) / base_path
        if not base_path.exists():
            raise doc.error(f"base spec {data['base']!r} not found", ("base",))
        base_data, base_doc = _compose(base_path.read_text(), str(base_path))
        if "base" in base_data:
            raise base_doc.error("a base spec cannot have its own base", ("base",))
        merged = dict(base_data)
        merged.update({k: v for k, v in data.items() if k != "base"})
        docs = {k: (doc if k in data else base_doc) for k in merged}
        data = merged
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        path = tuple(exc.absolute_path)
        d = docs.get(path[0], doc) if path else doc
        raise d.error(f"schema: {exc.message}", path) from None
    return _build(data, docs, source)


def load(path: str | Path) -> ProblemSpec:
    path = Path(path)
    if not path.exists():
        raise SpecError("file not found", str(path))
    return loads(path.read_text(), str(path), path.parent)


def bundled(name: str = "cruise") -> Path:
    """Path of a spec shipped with the package (``cruise``, ``cruise_test2``, ``cruise_test3``)."""
    ref = resources.files("reqdecomp") / "data" / f"{name}.yaml"
    with resources.as_file(ref) as p:
        return Path(p)


def _subdivision(value, ds: DesignSolution, doc: _Doc | None) -> int | dict[str, int]:
    if isinstance(value, int):
        return value
    known = set(ds.external_inputs) | set(ds.params)
    for name in value:
        if name not in known:
            raise doc.error(f"subdivision for {name!r}, which is neither an input nor a parameter", ("knobs", "subdivision", name))
    return dict(value)


def _build(data: dict, docs: Mapping[str, _Doc], source: str) -> ProblemSpec:
    cdoc, ddoc, rdoc, kdoc = docs["contract"], docs["design"], docs["realizable_sets"], docs["coefficients"]
    c = data["contract"]
    outputs = []
    for i, item in enumerate(c["outputs"]):
        w = item.get("window")
        window = Window(-math.inf, math.inf) if w is None else Window(*_iv(cdoc, w, ("contract", "outputs", i, "window")))
        outputs.append((window, _box(cdoc, item["box"], ("contract", "outputs", i, "box"))))
    contract = RelationalContract(_box(cdoc, c["inputs"], ("contract", "inputs")), OutputSpec(tuple(outputs)))

    d = data["design"]
    params = _box(ddoc, d["params"], ("design", "params"))
    inputs = _box(ddoc, d["inputs"], ("design", "inputs"))
    variables = tuple(Variable(v) if isinstance(v, str) else Variable(v["id"], v.get("unit", "")) for v in d["variables"])
    blocks: list[Block] = []
    for i, b in enumerate(d["blocks"]):
        path = ("design", "blocks", i)
        kind = b.get("kind", "algebraic")
        exprs = {}
        for key in ("expr", "derivative", "initial"):
            if key in b:
                exprs[key] = _expr(ddoc, b[key], params, path + (key,))
        need = {"algebraic": ("expr",), "integrator": ("derivative", "initial"), "controller": ("expr", "derivative", "initial")}[kind]
        for key in need:
            if key not in exprs:
                raise ddoc.error(f"{kind} block {b['id']} needs {key!r}", path)
        if kind == "controller" and "state" not in b:
            raise ddoc.error(f"controller block {b['id']} needs 'state'", path)
        blocks.append(make_block(b["id"], kind, b["output"], state=b.get("state"), params=params, **exprs))
    knobs = data.get("knobs", {})
    ds = DesignSolution(tuple(blocks), variables, params, inputs, float(d.get("horizon", 100.0)), float(knobs.get("step", 0.01)))
    diags = validate(ds)
    if diags:
        raise ddoc.error("design solution: " + "; ".join(diags), ("design", "blocks"))

    per_block: dict[str, dict[str, Interval]] = {}
    uniform: dict[str, Interval] = {}
    for v, val in data["realizable_sets"].items():
        path = ("realizable_sets", v)
        if v not in ds.variable_ids:
            raise rdoc.error(f"realizable set for unknown variable {v!r}", path)
        if isinstance(val, list):
            uniform[v] = _iv(rdoc, val, path)
        else:
            per_block[v] = {k: _iv(rdoc, iv, path + (k,)) for k, iv in val.items()}
    missing = [v for v in ds.variable_ids if v not in uniform and v not in per_block]
    if missing:
        raise rdoc.error(f"no realizable set for {missing}", ("realizable_sets",))
    rs = RealizableSets.uniform(ds, uniform)
    rs = RealizableSets({**rs.per_block, **per_block})

    roles = incidence(ds)
    coeffs: dict[tuple[str, str], float] = {}
    for v, row in data["coefficients"].items():
        for b, a in row.items():
            if roles.get((v, b), Role.NONE) is Role.NONE:
                raise kdoc.error(f"coefficient for ({v}, {b}) but {v} does not touch {b}", ("coefficients", v, b))
            coeffs[(v, b)] = float(a)
    uncovered = sorted(k for k, r in roles.items() if r is not Role.NONE and k not in coeffs)
    if uncovered:
        raise kdoc.error(f"missing difficulty coefficients for {uncovered}", ("coefficients",))

    kn = Knobs(
        step=float(knobs.get("step", 0.01)),
        subdivision=_subdivision(knobs.get("subdivision", 4), ds, docs.get("knobs")),
        subdivide_params=bool(knobs.get("subdivide_params", True)),
        mc_trajectories=int(knobs.get("mc_trajectories", 1000)),
        seed=int(knobs.get("seed", 0)),
        report_windows=tuple(Window(*_iv(docs.get("knobs", cdoc), w, ("knobs", "report_windows", i))) for i, w in enumerate(knobs.get("report_windows", []))),
    )
    return ProblemSpec(data.get("name", Path(source).stem), contract, ds, rs, coeffs, kn, source)
