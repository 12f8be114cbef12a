"""Design solutions: blocks, variables, parameters and their structure."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from typing import Iterable, Mapping

from .expr import Expr, identifiers, substitute_params
from .interval import Interval, IntervalBox


class BlockKind(str, enum.Enum):
    ALGEBRAIC = "algebraic"
    INTEGRATOR = "integrator"
    CONTROLLER = "controller"


class Role(str, enum.Enum):
    INPUT = "input"
    OUTPUT = "output"
    NONE = "none"


@dataclass(frozen=True)
class Block:
    """One function ``g^k`` of the design solution.

    * ``algebraic``: ``output = expr``.
    * ``integrator``: ``d(output)/dt = derivative`` with ``output(0) = initial``.
    * ``controller``: ``output = expr`` where ``expr`` may read the internal
      state ``state``; ``d(state)/dt = derivative``, ``state(0) = initial``.

    ``initial`` expressions read external inputs only.
    """

    id: str
    kind: BlockKind
    output: str
    expr: Expr | None = None
    derivative: Expr | None = None
    initial: Expr | None = None
    state: str | None = None

    def _exprs(self) -> list[Expr]:
        return [e for e in (self.expr, self.derivative) if e is not None]

    def referenced(self) -> tuple[set[str], set[str]]:
        vs: set[str] = set()
        ps: set[str] = set()
        for e in self._exprs():
            v, p = identifiers(e)
            vs |= v
            ps |= p
        if self.state:
            vs.discard(self.state)
        return vs, ps


@dataclass(frozen=True)
class Variable:
    id: str
    unit: str = ""


@dataclass(frozen=True)
class DesignSolution:
    blocks: tuple[Block, ...]
    variables: tuple[Variable, ...]
    params: IntervalBox
    external_inputs: IntervalBox
    horizon: float = 100.0
    step: float = 0.01

    @property
    def variable_ids(self) -> list[str]:
        return [v.id for v in self.variables]

    def block(self, block_id: str) -> Block:
        for b in self.blocks:
            if b.id == block_id:
                return b
        raise KeyError(block_id)

    def producer(self, var: str) -> Block | None:
        for b in self.blocks:
            if b.output == var:
                return b
        return None

    def block_inputs(self, b: Block) -> list[str]:
        """Network variables read by ``b`` (external inputs and params excluded)."""
        vs, _ = b.referenced()
        known = set(self.variable_ids)
        return sorted(v for v in vs if v in known)

    def block_params(self, b: Block) -> list[str]:
        _, ps = b.referenced()
        return sorted(ps)

    def block_externals(self, b: Block) -> list[str]:
        vs, _ = b.referenced()
        names = set(vs)
        if b.initial is not None:
            names |= identifiers(b.initial)[0]
        return sorted(n for n in names if n in self.external_inputs)


def make_block(
    id: str,
    kind: str | BlockKind,
    output: str,
    *,
    expr: Expr | None = None,
    derivative: Expr | None = None,
    initial: Expr | None = None,
    state: str | None = None,
    params: Iterable[str] = (),
) -> Block:
    """Build a block, re-tagging parameter identifiers as ``Param`` nodes."""
    params = list(params)
    fix = (lambda e: None if e is None else substitute_params(e, params))
    return Block(id, BlockKind(kind), output, fix(expr), fix(derivative), fix(initial), state)


def validate(ds: DesignSolution) -> list[str]:
    """Structural diagnostics; an empty list means the solution is well formed."""
    diags: list[str] = []
    var_ids = ds.variable_ids
    known = set(var_ids)
    if len(known) != len(var_ids):
        diags.append("duplicate variable declaration")
    ext = set(ds.external_inputs)
    params = set(ds.params)
    if known & ext:
        diags.append(f"names used as both variable and external input: {sorted(known & ext)}")
    if known & params:
        diags.append(f"names used as both variable and parameter: {sorted(known & params)}")
    if ds.params.is_empty:
        diags.append("parameter box is empty")
    seen: dict[str, str] = {}
    ids = [b.id for b in ds.blocks]
    if len(set(ids)) != len(ids):
        diags.append("duplicate block id")
    for b in ds.blocks:
        if b.output in seen:
            diags.append(f"variable produced twice: {b.output} ({seen[b.output]}, {b.id})")
        else:
            seen[b.output] = b.id
        if b.output not in known:
            diags.append(f"block {b.id} output {b.output} is not a declared variable")
        if b.kind is BlockKind.ALGEBRAIC and b.expr is None:
            diags.append(f"algebraic block {b.id} has no expression")
        if b.kind is not BlockKind.ALGEBRAIC:
            if b.derivative is None or b.initial is None:
                diags.append(f"block {b.id} needs derivative and initial expressions")
            elif identifiers(b.initial)[0] - ext:
                bad = sorted(identifiers(b.initial)[0] - ext)
                diags.append(f"block {b.id} initial value reads non-inputs: {bad}")
        if b.kind is BlockKind.CONTROLLER and (b.expr is None or not b.state):
            diags.append(f"controller block {b.id} needs an output expression and a state name")
        vs, ps = b.referenced()
        for name in sorted(vs):
            if name not in known and name not in ext:
                diags.append(f"block {b.id} references unknown identifier {name}")
        for name in sorted(ps):
            if name not in params:
                diags.append(f"block {b.id} parameter {name} not housed in params")
    for v in var_ids:
        if v not in seen:
            diags.append(f"variable {v} has no producing block")
    try:
        algebraic_order(ds)
    except CycleError:
        diags.append("algebraic loop")
    return diags


def _algebraic_graph(ds: DesignSolution) -> dict[str, set[str]]:
    """Dependency graph among algebraic blocks; integrator and controller outputs are sources.

    A controller output is computed from its state and the *current* values of
    its inputs, so its inputs must precede it.
    """
    producer = {b.output: b for b in ds.blocks}
    graph: dict[str, set[str]] = {}
    for b in ds.blocks:
        if b.kind is BlockKind.INTEGRATOR:
            continue
        deps: set[str] = set()
        vs, _ = identifiers(b.expr) if b.expr is not None else (set(), set())
        for v in vs:
            p = producer.get(v)
            if p is not None and p.kind is not BlockKind.INTEGRATOR:
                deps.add(p.id)
        graph[b.id] = deps
    return graph


def algebraic_order(ds: DesignSolution) -> list[str]:
    """Topological order of the non-integrator blocks (raises ``CycleError``)."""
    ts = TopologicalSorter(_algebraic_graph(ds))
    order = list(ts.static_order())
    rank = {b.id: i for i, b in enumerate(ds.blocks)}
    # stable: a deterministic order consistent with the dependencies
    result: list[str] = []
    graph = _algebraic_graph(ds)
    remaining = set(order)
    while remaining:
        ready = sorted((n for n in remaining if not (graph[n] & remaining)), key=rank.__getitem__)
        result.append(ready[0])
        remaining.discard(ready[0])
    return result


def classify_system_level(ds: DesignSolution) -> tuple[set[str], set[str]]:
    """Variables (and their blocks) whose behaviour only the whole system determines.

    These are the outputs of integrator and controller blocks; they stay at
    Level 0 and their blocks are left out of the CSP and the trade-off constraints.
    """
    blocks = {b.id for b in ds.blocks if b.kind is not BlockKind.ALGEBRAIC}
    variables = {b.output for b in ds.blocks if b.kind is not BlockKind.ALGEBRAIC}
    return variables, blocks


def incidence(ds: DesignSolution) -> dict[tuple[str, str], Role]:
    """Total map ``(variable, block) -> role``."""
    out: dict[tuple[str, str], Role] = {}
    for b in ds.blocks:
        ins = set(ds.block_inputs(b))
        for v in ds.variable_ids:
            if b.output == v:
                out[(v, b.id)] = Role.OUTPUT
            elif v in ins:
                out[(v, b.id)] = Role.INPUT
            else:
                out[(v, b.id)] = Role.NONE
    return out


def state_names(ds: DesignSolution) -> list[str]:
    """ODE state, in block order: integrator outputs and controller internal states."""
    names = []
    for b in ds.blocks:
        if b.kind is BlockKind.INTEGRATOR:
            names.append(b.output)
        elif b.kind is BlockKind.CONTROLLER:
            names.append(b.state)
    return names
