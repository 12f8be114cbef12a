"""Trade-off between the lower (reachable) and upper (realizable) bounds of subcontracts.

Every variable gets one decision pair ``(lo, hi)`` shared by all blocks that
touch it. The pair must sit between the reachable set and the contracted
realizable set, and every non-system-level block must map its input
subcontracts into its output subcontract. A log barrier weighted by
difficulty coefficients picks a point inside those bands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .contracts import OutputSpec, Verdict, Witness
from .csp import slack, within
from .expr import Expr, diff, eval_forward, identifiers
from .interval import Interval, IntervalBox, UnboundedQuotientError
from .network import BlockKind, DesignSolution, Role, algebraic_order, classify_system_level, incidence


class InfeasibleProblemError(ValueError):
    def __init__(self, variables: Sequence[str], detail: str = "reachable set not inside realizable set"):
        self.variables = tuple(variables)
        super().__init__(f"{detail}: {', '.join(self.variables)}")


@dataclass(frozen=True)
class BlockConstraint:
    """``output ⊇ g(inputs, params)``, in endpoint form.

    With ``signs`` set, ``g`` is monotone in every identifier and the clauses
    are ``lo_out <= g(lower corner)`` and ``hi_out >= g(upper corner)``.
    Without it the image is the natural interval extension over the boxes.
    """

    block: str
    output: str
    expr: Expr
    inputs: tuple[str, ...]
    signs: Mapping[str, int] | None

    def image(self, box: Mapping[str, Interval], params: Mapping[str, Interval]) -> Interval:
        scope = {**params, **{v: box[v] for v in self.inputs}}
        if self.signs is None:
            try:
                return eval_forward(self.expr, scope)
            except UnboundedQuotientError:
                return Interval.entire()
        lo_env = {}
        hi_env = {}
        for name, s in self.signs.items():
            iv = scope[name]
            lo_env[name] = Interval.point(iv.lo if s >= 0 else iv.hi)
            hi_env[name] = Interval.point(iv.hi if s >= 0 else iv.lo)
        return Interval(eval_forward(self.expr, lo_env).lo, eval_forward(self.expr, hi_env).hi)

    def violation(self, box: Mapping[str, Interval], params: Mapping[str, Interval]) -> float:
        img = self.image(box, params)
        out = box[self.output]
        return max(0.0, out.lo - img.lo) + max(0.0, img.hi - out.hi)

    def describe(self) -> str:
        kind = "monotone corners" if self.signs is not None else "interval image"
        return f"{self.output} ⊇ {self.block}({', '.join(self.inputs)}) [{kind}]"


@dataclass(frozen=True)
class TradeoffProblem:
    variables: tuple[str, ...]
    ra: IntervalBox
    re: IntervalBox
    # feasible band per variable: lo in [lo_band], hi in [hi_band]
    lo_band: Mapping[str, tuple[float, float]]
    hi_band: Mapping[str, tuple[float, float]]
    constraints: tuple[BlockConstraint, ...]
    params: IntervalBox
    coefficients: Mapping[tuple[str, str], float]
    roles: Mapping[tuple[str, str], Role]
    system_variables: tuple[str, ...]
    system_blocks: tuple[str, ...]
    level0_clip: IntervalBox
    block_io: Mapping[str, tuple[tuple[str, ...], str]]

    @property
    def coords(self) -> list[tuple[str, int]]:
        """Decision coordinates ``(variable, 0 for lo | 1 for hi)``."""
        return [(v, s) for v in self.variables for s in (0, 1)]

    def band(self, v: str, side: int) -> tuple[float, float]:
        return (self.lo_band if side == 0 else self.hi_band)[v]

    def pinned(self, v: str, side: int) -> bool:
        a, b = self.band(v, side)
        return a == b


def _monotone_signs(expr: Expr, ranges: Mapping[str, Interval]) -> dict[str, int] | None:
    vs, ps = identifiers(expr)
    signs = {}
    for name in sorted(vs | ps):
        try:
            d = eval_forward(diff(expr, name), ranges)
        except UnboundedQuotientError:
            return None
        if d.lo >= 0:
            signs[name] = 1
        elif d.hi <= 0:
            signs[name] = -1
        else:
            return None
    return signs


def build_problem(
    ds: DesignSolution,
    reach: Mapping[str, Interval],
    contracted: Mapping[str, Interval],
    coeffs: Mapping[tuple[str, str], float],
    level0_output: OutputSpec | None = None,
) -> TradeoffProblem:
    """Assemble bands, block clauses and barrier weights.

    ``coeffs`` maps ``(variable, block id)`` to a positive difficulty weight
    and must cover exactly the incident pairs. A reachable set that does not
    fit its realizable set raises :class:`InfeasibleProblemError`.
    """
    roles = incidence(ds)
    incident = {k for k, r in roles.items() if r is not Role.NONE}
    missing = incident - set(coeffs)
    extra = set(coeffs) - incident
    if missing:
        raise ValueError(f"missing difficulty coefficients for {sorted(missing)}")
    if extra:
        raise ValueError(f"coefficients for pairs that are not incident: {sorted(extra)}")
    bad = [k for k, a in coeffs.items() if not a > 0]
    if bad:
        raise ValueError(f"difficulty coefficients must be positive: {sorted(bad)}")
    sys_vars, sys_blocks = classify_system_level(ds)
    variables = tuple(ds.variable_ids)
    clip: dict[str, Interval] = {}
    if level0_output is not None:
        for v, iv in level0_output.box().items():
            if v in variables:
                clip[v] = iv
    crossed = [v for v in variables if not within(reach[v], contracted[v])]
    if crossed:
        raise InfeasibleProblemError(crossed)
    lo_band: dict[str, tuple[float, float]] = {}
    hi_band: dict[str, tuple[float, float]] = {}
    clipped = []
    for v in variables:
        ra, re = reach[v], contracted[v]
        lo_min = re.lo
        hi_max = re.hi
        if v in clip:
            lo_min = max(lo_min, clip[v].lo)
            hi_max = min(hi_max, clip[v].hi)
        # a band thinner than the slack is pinned on the side that keeps RA inside
        lo_band[v] = (ra.lo, ra.lo) if ra.lo - lo_min <= slack(re) else (lo_min, ra.lo)
        hi_band[v] = (ra.hi, ra.hi) if hi_max - ra.hi <= slack(re) else (ra.hi, hi_max)
        if lo_min > ra.lo + slack(re) or hi_max < ra.hi - slack(re):
            clipped.append(v)
    if clipped:
        raise InfeasibleProblemError(clipped, "reachable set exceeds the level-0 output")
    # external inputs are fixed boxes just like parameters
    fixed = IntervalBox({**ds.external_inputs, **ds.params})
    ranges = dict(fixed)
    for v in variables:
        ranges[v] = Interval(lo_band[v][0], hi_band[v][1])
    cons = []
    io = {}
    rank = {b: i for i, b in enumerate(algebraic_order(ds))}
    for b in sorted(ds.blocks, key=lambda b: rank.get(b.id, -1)):
        if b.kind is not BlockKind.ALGEBRAIC or b.id in sys_blocks:
            continue
        ins = tuple(ds.block_inputs(b))
        io[b.id] = (ins, b.output)
        cons.append(BlockConstraint(b.id, b.output, b.expr, ins, _monotone_signs(b.expr, ranges)))
    return TradeoffProblem(
        variables=variables,
        ra=IntervalBox((v, reach[v]) for v in variables),
        re=IntervalBox((v, contracted[v]) for v in variables),
        lo_band=lo_band,
        hi_band=hi_band,
        constraints=tuple(cons),
        params=fixed,
        coefficients=dict(coeffs),
        roles={k: r for k, r in roles.items() if r is not Role.NONE},
        system_variables=tuple(v for v in variables if v in sys_vars),
        system_blocks=tuple(b.id for b in ds.blocks if b.id in sys_blocks),
        level0_clip=IntervalBox(clip),
        block_io=io,
    )


# --------------------------------------------------------------------------
# objective


def _terms(p: TradeoffProblem, v: str, side: int) -> tuple[float, float]:
    """Barrier weights ``(toward the lower band end, toward the upper band end)``.

    An input role pushes away from the realizable bound, an output role away
    from the reachable bound. For ``lo`` the realizable bound is the lower
    band end; for ``hi`` it is the upper one.
    """
    w_in = sum(a for (var, _), a in p.coefficients.items() if var == v and p.roles[(var, _)] is Role.INPUT)
    w_out = sum(a for (var, _), a in p.coefficients.items() if var == v and p.roles[(var, _)] is Role.OUTPUT)
    return (w_in, w_out) if side == 0 else (w_out, w_in)


def _coord_value(p: TradeoffProblem, v: str, side: int, x: float) -> float:
    if p.pinned(v, side):
        return 0.0
    a, b = p.band(v, side)
    if not (a < x < b):
        return math.inf
    wa, wb = _terms(p, v, side)
    return -(wa * math.log(x - a) + wb * math.log(b - x))


def objective(p: TradeoffProblem, point: Mapping[str, Interval]) -> float:
    """Sum of weighted log-barrier terms; ``+inf`` on or outside a band boundary."""
    total = 0.0
    for v, side in p.coords:
        x = point[v].lo if side == 0 else point[v].hi
        total += _coord_value(p, v, side, x)
    return total


def coordinate_argmin(p: TradeoffProblem, v: str, side: int) -> float:
    """Unconstrained minimiser of one coordinate's barrier terms (closed form)."""
    a, b = p.band(v, side)
    if a == b:
        return a
    wa, wb = _terms(p, v, side)
    if wa + wb == 0:
        return 0.5 * (a + b)
    return (wa * b + wb * a) / (wa + wb)


# --------------------------------------------------------------------------
# solving


@dataclass(frozen=True)
class SubcontractSet:
    level0_refinement: IntervalBox
    level1: Mapping[str, tuple[IntervalBox, IntervalBox]]
    level0_contract: tuple[IntervalBox, IntervalBox] | None = None
    level0_inputs: IntervalBox | None = None

    def to_json(self) -> dict:
        out: dict = {}
        if self.level0_contract is not None:
            out["level0_contract"] = {"input": self.level0_contract[0].to_json(), "output": self.level0_contract[1].to_json()}
        ref = {"output": self.level0_refinement.to_json()}
        if self.level0_inputs is not None:
            ref["input"] = self.level0_inputs.to_json()
        out["level0_refinement"] = ref
        out["level1"] = {b: {"input": i.to_json(), "output": o.to_json()} for b, (i, o) in self.level1.items()}
        return out

    @staticmethod
    def from_json(obj: Mapping) -> "SubcontractSet":
        c = obj.get("level0_contract")
        ref = obj["level0_refinement"]
        return SubcontractSet(
            level0_refinement=IntervalBox.from_json(ref["output"]),
            level1={b: (IntervalBox.from_json(r["input"]), IntervalBox.from_json(r["output"])) for b, r in obj["level1"].items()},
            level0_contract=None if c is None else (IntervalBox.from_json(c["input"]), IntervalBox.from_json(c["output"])),
            level0_inputs=IntervalBox.from_json(ref["input"]) if "input" in ref else None,
        )


@dataclass(frozen=True)
class SolveResult:
    feasible: bool
    subcontracts: SubcontractSet | None
    point: IntervalBox | None
    objective: float
    start_objective: float
    sweeps: int
    restored: bool
    witnesses: tuple[Witness, ...] = ()
    # objective at the first feasible iterate (equals start_objective when the midpoint is feasible)
    feasible_start_objective: float = math.nan


def subcontracts_from_point(p: TradeoffProblem, point: Mapping[str, Interval], **extra) -> SubcontractSet:
    level0 = IntervalBox((v, point[v]) for v in p.system_variables)
    level1 = {}
    for b, (ins, out) in p.block_io.items():
        level1[b] = (IntervalBox((v, point[v]) for v in ins), IntervalBox({out: point[out]}))
    return SubcontractSet(level0, level1, **extra)


def project(p: TradeoffProblem, seeds: Mapping[tuple[str, int], float]) -> dict[str, Interval]:
    """Box from endpoint seeds, block outputs widened to cover their images in dependency order.

    Every block clause holds for the result by construction; only the
    bands can be violated.
    """
    box = {}
    for v in p.variables:
        lo = p.lo_band[v][1] if p.pinned(v, 0) else seeds[(v, 0)]
        hi = p.hi_band[v][0] if p.pinned(v, 1) else seeds[(v, 1)]
        box[v] = Interval(min(lo, hi), max(lo, hi))
    for c in p.constraints:
        box[c.output] = box[c.output].hull(c.image(box, p.params))
    return box


def seeded_point(p: TradeoffProblem, eps: float) -> dict[tuple[str, int], float]:
    """Seeds a fraction ``eps`` of each band away from the reachable bound."""
    seeds = {}
    for v, side in p.coords:
        a, b = p.band(v, side)
        seeds[(v, side)] = b - eps * (b - a) if side == 0 else a + eps * (b - a)
    return seeds


def _band_witnesses(p: TradeoffProblem, box: Mapping[str, Interval]) -> list[Witness]:
    out = []
    for v in p.variables:
        a = p.lo_band[v][0] - (slack(p.re[v]) if p.pinned(v, 0) else 0.0)
        b = p.hi_band[v][1] + (slack(p.re[v]) if p.pinned(v, 1) else 0.0)
        if box[v].lo < a or box[v].hi > b:
            out.append(Witness(v, None, f"needs {box[v]}, band allows [{a:g}, {b:g}]"))
    return out


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden(f, a: float, b: float, iters: int) -> tuple[float, float]:
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def solve(
    p: TradeoffProblem,
    *,
    tol: float = 1e-9,
    max_sweeps: int = 10_000,
    line_iters: int = 48,
) -> SolveResult:
    """Coordinate descent on the barrier objective over endpoint seeds.

    The start is the band midpoint. Each sweep minimises along one seed at a
    time by golden-section search, over the part of its band where the
    projected box (see :func:`project`) stays inside every band. If the
    midpoint projects outside the bands, the start is pulled toward the
    reachable sets until it fits.
    """
    seeds = seeded_point(p, 0.5)
    start_obj = objective(p, {v: Interval(seeds[(v, 0)], seeds[(v, 1)]) for v in p.variables})
    if _band_witnesses(p, project(p, seeded_point(p, 0.0))):
        bad = _band_witnesses(p, project(p, seeded_point(p, 0.0)))
        return SolveResult(False, None, None, math.inf, start_obj, 0, True, tuple(bad))
    restored = bool(_band_witnesses(p, project(p, seeds)))
    if restored:
        good, bad_eps = 0.0, 0.5
        for _ in range(60):
            eps = 0.5 * (good + bad_eps)
            if _band_witnesses(p, project(p, seeded_point(p, eps))):
                bad_eps = eps
            else:
                good = eps
        seeds = seeded_point(p, good * (1 - 1e-6))

    def value(sd) -> float:
        box = project(p, sd)
        if _band_witnesses(p, box):
            return math.inf
        return objective(p, box)

    free = [k for k in p.coords if not p.pinned(*k)]
    f = value(seeds)
    first_obj = f
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        f_before = f
        for k in free:
            v, side = k
            a, b = p.band(v, side)
            cur = seeds[k]

            def along(x, k=k):
                trial = dict(seeds)
                trial[k] = x
                return value(trial)

            # widening a seed can only push boxes out of their bands; find how far is allowed
            wide = a if side == 0 else b
            if along(wide) == math.inf and not _band_witnesses(p, project(p, {**seeds, k: wide})) == []:
                good, bad_x = cur, wide
                for _ in range(line_iters):
                    m = 0.5 * (good + bad_x)
                    if _band_witnesses(p, project(p, {**seeds, k: m})):
                        bad_x = m
                    else:
                        good = m
                wide = good
            lo_x, hi_x = (wide, b) if side == 0 else (a, wide)
            x, fx = _golden(along, lo_x, hi_x, line_iters)
            if fx < f:
                seeds[k], f = x, fx
        if f_before - f < tol:
            break
    point = IntervalBox(project(p, seeds))
    subs = subcontracts_from_point(p, point)
    ok = verify_subcontracts(subs, p)
    return SolveResult(ok.ok, subs if ok.ok else None, point, f, start_obj, sweeps, restored, ok.witnesses, first_obj)


# --------------------------------------------------------------------------
# verification


def _clause_witnesses(p: TradeoffProblem, box: Mapping[str, Interval]) -> tuple[Witness, ...]:
    out = []
    for c in p.constraints:
        img = c.image(box, p.params)
        if not box[c.output].contains(img):
            out.append(Witness(c.output, None, f"{c.block}: image [{img.lo:g}, {img.hi:g}] not within subcontract {box[c.output]}"))
    return tuple(out)


def verify_subcontracts(s: SubcontractSet, p: TradeoffProblem) -> Verdict:
    """Exact re-check of every band, level-0 and block clause, plus equality of shared variables."""
    bad: list[Witness] = []
    seen: dict[str, Interval] = {}
    sources: list[tuple[str, str, Interval]] = [("level0", v, iv) for v, iv in s.level0_refinement.items()]
    for b, (ins, outs) in s.level1.items():
        sources += [(b, v, iv) for v, iv in ins.items()]
        sources += [(b, v, iv) for v, iv in outs.items()]
    for where, v, iv in sources:
        if v in seen and seen[v] != iv:
            bad.append(Witness(v, None, f"composability: {where} uses {iv}, elsewhere {seen[v]}"))
        seen.setdefault(v, iv)
    for v in p.variables:
        if v not in seen:
            bad.append(Witness(v, None, "no subcontract"))
    if bad:
        return Verdict.of(bad)
    for v in p.variables:
        iv = seen[v]
        if not iv.contains(p.ra[v]):
            bad.append(Witness(v, None, f"lower bound: {iv} does not contain reachable {p.ra[v]}"))
        if not within(iv, p.re[v]):
            bad.append(Witness(v, None, f"upper bound: {iv} exceeds realizable {p.re[v]}"))
        if v in p.level0_clip and not within(iv, p.level0_clip[v]):
            bad.append(Witness(v, None, f"level 0: {iv} exceeds {p.level0_clip[v]}"))
    bad += _clause_witnesses(p, seen)
    return Verdict.of(bad)
