"""Constraint satisfaction over supplier realizable sets.

Domains start as the intersection of every supplier's realizable set for a
variable; the algebraic blocks of the design solution are the constraints;
HC4 revisions run to a fixed point.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from .expr import Expr, hc4_revise, identifiers, substitute_params, unparse
from .interval import EMPTY, Interval, IntervalBox
from .network import BlockKind, DesignSolution, algebraic_order, classify_system_level
from .reach import ReachResult


@dataclass(frozen=True)
class RealizableSets:
    """Per-variable realizable sets, one per supplier block that touches the variable."""

    per_block: Mapping[str, Mapping[str, Interval]]

    @staticmethod
    def uniform(ds: DesignSolution, box: Mapping[str, Interval]) -> "RealizableSets":
        """Every block incident to a variable offers the same set for it."""
        out: dict[str, dict[str, Interval]] = {}
        for b in ds.blocks:
            for v in [b.output, *ds.block_inputs(b)]:
                if v in box:
                    out.setdefault(v, {})[b.id] = box[v]
        for v, iv in box.items():
            out.setdefault(v, {})
        for v in out:
            if not out[v] and v in box:
                out[v]["*"] = box[v]
        return RealizableSets(out)

    def intersection(self) -> dict[str, Interval]:
        out = {}
        for v, sets in self.per_block.items():
            acc = Interval.entire()
            for iv in sets.values():
                acc = acc.intersect(iv)
            out[v] = acc
        return out

    def to_json(self) -> dict:
        return {v: {k: iv.to_json() for k, iv in sorted(s.items())} for v, s in sorted(self.per_block.items())}


@dataclass(frozen=True)
class Constraint:
    block: str
    output: str
    expr: Expr

    @property
    def variables(self) -> set[str]:
        return identifiers(self.expr)[0] | {self.output}

    def __str__(self) -> str:
        return f"{self.output} = {unparse(self.expr)}"


@dataclass(frozen=True)
class Csp:
    domains: IntervalBox
    params: IntervalBox
    constraints: tuple[Constraint, ...]


@dataclass(frozen=True)
class TraceEntry:
    step: int
    block: str
    variable: str
    before: Interval
    after: Interval

    def to_json(self) -> dict:
        return {
            "step": self.step,
            "block": self.block,
            "variable": self.variable,
            "before": self.before.to_json(),
            "after": self.after.to_json(),
        }


@dataclass(frozen=True)
class Contracted:
    domains: IntervalBox
    trace: tuple[TraceEntry, ...] = ()


@dataclass(frozen=True)
class LowerBoundViolation:
    domains: IntervalBox
    violations: tuple[str, ...]
    trace: tuple[TraceEntry, ...] = ()


@dataclass(frozen=True)
class Infeasible:
    first_empty: str
    trace: tuple[TraceEntry, ...] = ()
    witness: str = ""


ContractionOutcome = Union[Contracted, LowerBoundViolation, Infeasible]


def build_csp(ds: DesignSolution, rs: RealizableSets) -> Csp | Infeasible:
    """CSP from the algebraic blocks that are not system-level.

    Returns :class:`Infeasible` at once when some variable's realizable sets
    have an empty intersection.
    """
    inter = rs.intersection()
    for v in ds.variable_ids:
        if v not in inter:
            raise KeyError(f"no realizable set for {v}")
        if inter[v].is_empty:
            sets = rs.per_block[v]
            names = " ∩ ".join(f"S[{v}]^{k}={sets[k]}" for k in sorted(sets))
            return Infeasible(v, (), f"{names} = ∅")
    _, system_blocks = classify_system_level(ds)
    order = algebraic_order(ds)
    rank = {b: i for i, b in enumerate(order)}
    cons = [
        # external inputs are read like parameters and never contracted
        Constraint(b.id, b.output, substitute_params(b.expr, ds.external_inputs))
        for b in ds.blocks
        if b.kind is BlockKind.ALGEBRAIC and b.id not in system_blocks
    ]
    cons.sort(key=lambda c: rank[c.block])
    domains = IntervalBox((v, inter[v]) for v in ds.variable_ids)
    return Csp(domains, IntervalBox({**ds.external_inputs, **ds.params}), tuple(cons))


def slack(iv: Interval) -> float:
    """Rounding slack ``max(1e-9, 1e-9 * width)``, for comparing independently computed enclosures."""
    w = iv.width
    return 1e-9 if not math.isfinite(w) else max(1e-9, 1e-9 * w)


def within(inner: Interval, outer: Interval) -> bool:
    """``inner ⊆ outer`` up to the rounding slack of ``outer``."""
    if inner.is_empty:
        return True
    if outer.is_empty:
        return False
    s = slack(outer)
    return outer.lo - s <= inner.lo and inner.hi <= outer.hi + s


def _moved(before: Interval, after: Interval) -> bool:
    """An endpoint moved by more than the rounding slack."""
    if after.is_empty:
        return not before.is_empty
    s = slack(before)
    return (after.lo - before.lo) > s or (before.hi - after.hi) > s


def propagate(csp: Csp, max_revisions: int = 100_000) -> Contracted | Infeasible:
    """HC4 revisions over a FIFO worklist until no domain moves.

    The worklist is seeded from the last block in dependency order back to
    the first. A revision that moves a domain requeues every other
    constraint reading that variable.
    """
    dom = dict(csp.domains)
    for v, iv in dom.items():
        if iv.is_empty:
            return Infeasible(v, ())
    trace: list[TraceEntry] = []
    queue = deque(reversed(range(len(csp.constraints))))
    queued = set(queue)
    readers: dict[str, list[int]] = {}
    for i, c in enumerate(csp.constraints):
        for v in sorted(c.variables):
            readers.setdefault(v, []).append(i)
    step = 0
    while queue and step < max_revisions:
        i = queue.popleft()
        queued.discard(i)
        c = csp.constraints[i]
        step += 1
        scope = {**csp.params, **{v: dom[v] for v in c.variables}}
        res = hc4_revise(c.output, c.expr, scope)
        for v in sorted(c.variables):
            after = res.scope[v]
            before = dom[v]
            if after == before:
                continue
            if res.feasible and not _moved(before, after):
                continue
            trace.append(TraceEntry(step, c.block, v, before, after))
            dom[v] = after
            for j in readers[v]:
                if j != i and j not in queued:
                    queue.append(j)
                    queued.add(j)
        if not res.feasible:
            name = res.empty_at if res.empty_at in dom else c.output
            if not dom[name].is_empty:
                trace.append(TraceEntry(step, c.block, name, dom[name], EMPTY))
            return Infeasible(name, tuple(trace))
    return Contracted(IntervalBox((v, dom[v]) for v in csp.domains), tuple(trace))


def classify(domains: Mapping[str, Interval] | Contracted, reach: ReachResult | Mapping[str, Interval]) -> Contracted | LowerBoundViolation:
    """Flag every variable whose contracted domain fails to hold its reachable set.

    Both sides are outward-rounded enclosures, so containment is judged up to
    the rounding slack.
    """
    trace: tuple[TraceEntry, ...] = ()
    if isinstance(domains, Contracted):
        trace = domains.trace
        domains = domains.domains
    ra = reach.whole if isinstance(reach, ReachResult) else reach
    bad = tuple(v for v in domains if v in ra and not within(ra[v], domains[v]))
    box = IntervalBox(domains)
    if bad:
        return LowerBoundViolation(box, bad, trace)
    return Contracted(box, trace)


def outcome_to_json(o: ContractionOutcome, with_trace: bool = False) -> dict:
    if isinstance(o, Infeasible):
        out = {"result": "infeasible", "first_empty": o.first_empty}
        if o.witness:
            out["witness"] = o.witness
    elif isinstance(o, LowerBoundViolation):
        out = {"result": "lower_bound_violation", "domains": o.domains.to_json(), "violations": list(o.violations)}
    else:
        out = {"result": "contracted", "domains": o.domains.to_json()}
    if with_trace:
        out["trace"] = [t.to_json() for t in o.trace]
    return out


def format_trace(trace: Sequence[TraceEntry]) -> str:
    return "\n".join(f"{t.step:4d} {t.block:>6} {t.variable:>8}: {t.before} -> {t.after}" for t in trace)
