"""Contracts over interval boxes and the checks that relate them.

A relational contract pairs an allowable input box with an acceptable output
specification; a functional contract adds a structure (expressions or a
whole design solution) with an uncertain parameter box.
"""

from __future__ import annotations

import enum
import itertools
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .expr import Expr, eval_forward, evaluate, identifiers, parse
from .interval import EMPTY, Interval, IntervalBox
from .network import DesignSolution
from .reach import ReachResult, Window, simulate_hulls

ALL_TIME = Window(-math.inf, math.inf)


class NamespaceError(KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "namespace mismatch"


class NotConnectedError(ValueError):
    def __init__(self, msg: str = "not connected"):
        super().__init__(msg)


@dataclass(frozen=True)
class Witness:
    variable: str
    window: Window | None
    detail: str

    def to_json(self) -> dict:
        out = {"variable": self.variable, "detail": self.detail}
        if self.window is not None and self.window != ALL_TIME:
            out["window"] = [self.window.t0, self.window.t1]
        return out


@dataclass(frozen=True)
class Verdict:
    ok: bool
    witnesses: tuple[Witness, ...] = ()

    def __bool__(self) -> bool:
        return self.ok

    @staticmethod
    def of(witnesses: Iterable[Witness]) -> "Verdict":
        w = tuple(witnesses)
        return Verdict(not w, w)


# --------------------------------------------------------------------------
# contract types


@dataclass(frozen=True)
class OutputSpec:
    """Time-windowed output boxes; a value at time ``t`` must lie in every box whose window holds ``t``."""

    windows: tuple[tuple[Window, IntervalBox], ...]

    @staticmethod
    def static(box: Mapping[str, Interval]) -> "OutputSpec":
        return OutputSpec(((ALL_TIME, IntervalBox(box)),))

    @property
    def variables(self) -> set[str]:
        out: set[str] = set()
        for _, box in self.windows:
            out |= set(box)
        return out

    def at(self, t: float, var: str) -> Interval | None:
        """Intersection of every box that applies at ``t``; ``None`` when unconstrained."""
        acc = None
        for w, box in self.windows:
            if var in box and w.t0 <= t <= w.t1:
                acc = box[var] if acc is None else acc.intersect(box[var])
        return acc

    def box(self) -> IntervalBox:
        """Hull over all windows (the time-free view)."""
        out: dict[str, Interval] = {}
        for _, b in self.windows:
            for k, v in b.items():
                out[k] = out[k].hull(v) if k in out else v
        return IntervalBox(out)

    def is_empty(self) -> bool:
        return any(b.is_empty for _, b in self.windows)


@dataclass(frozen=True)
class RelationalContract:
    input: IntervalBox
    output: OutputSpec

    def __post_init__(self):
        if self.input.is_empty or self.output.is_empty():
            raise ValueError("contract input and output boxes must be non-empty")


@dataclass(frozen=True)
class FunctionalContract:
    """Relational contract plus a structure ``output var -> Expr`` (or a design solution)."""

    base: RelationalContract
    structure: DesignSolution | Mapping[str, Expr]
    params: IntervalBox = field(default_factory=IntervalBox)

    def __post_init__(self):
        if isinstance(self.structure, DesignSolution):
            needed = set(self.structure.params)
        else:
            needed = set()
            for e in self.structure.values():
                needed |= identifiers(e)[1]
        missing = needed - set(self.params)
        if missing:
            raise ValueError(f"parameters without a box: {sorted(missing)}")

    def image(self, inputs: Mapping[str, Interval] | None = None, params: Mapping[str, Interval] | None = None) -> IntervalBox:
        """Natural interval image of the structure over ``inputs`` (default: own input box)."""
        if isinstance(self.structure, DesignSolution):
            raise TypeError("image of a design solution needs reachability analysis")
        scope = dict(self.base.input if inputs is None else inputs)
        scope.update(self.params if params is None else params)
        out = {}
        for var, e in self.structure.items():
            out[var] = eval_forward(e, scope)
            scope[var] = out[var]
        return IntervalBox(out)


# --------------------------------------------------------------------------
# implementations


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    values: np.ndarray


class Implementation(ABC):
    """A deterministic run: input point in, output point (or trajectory) out."""

    @abstractmethod
    def window_hulls(
        self, inputs: Mapping[str, np.ndarray], windows: Sequence[Window]
    ) -> dict[Window, dict[str, tuple[np.ndarray, np.ndarray]]]:
        """Per-sample range of each output over each window."""


class StaticImplementation(Implementation):
    """Point-parameter expressions, evaluated in order (later ones may read earlier outputs)."""

    def __init__(self, exprs: Mapping[str, Expr | str] | Callable[[Mapping[str, np.ndarray]], Mapping[str, np.ndarray]], params: Mapping[str, float] | None = None):
        self.params = dict(params or {})
        if callable(exprs):
            self._fn = exprs
        else:
            parsed = {k: (parse(v, self.params) if isinstance(v, str) else v) for k, v in exprs.items()}

            def fn(env):
                env = dict(env)
                env.update(self.params)
                out = {}
                for k, e in parsed.items():
                    out[k] = env[k] = evaluate(e, env, float)
                return out

            self._fn = fn

    def window_hulls(self, inputs, windows):
        out = self._fn(inputs)
        n = max((np.size(v) for v in inputs.values()), default=1)
        vals = {k: np.broadcast_to(np.asarray(v, dtype=float), (n,)) for k, v in out.items()}
        return {w: {k: (v, v) for k, v in vals.items()} for w in windows}


class SimulatedImplementation(Implementation):
    """Numeric closed-loop simulation of a design solution with point parameters."""

    def __init__(self, ds: DesignSolution, params: Mapping[str, float], step: float | None = None):
        self.ds = ds
        self.params = dict(params)
        self.step = step

    def window_hulls(self, inputs, windows):
        samples = dict(inputs)
        samples.update({k: np.asarray(v, dtype=float) for k, v in self.params.items()})
        hulls = simulate_hulls(self.ds, samples, [w if w != ALL_TIME else Window(0.0, self.ds.horizon) for w in windows], self.step)
        out = {}
        for w in windows:
            key = w if w != ALL_TIME else Window(0.0, self.ds.horizon)
            out[w] = hulls[key]
        return out


# --------------------------------------------------------------------------
# checks


def _same_names(a: Iterable[str], b: Iterable[str], what: str) -> None:
    a, b = set(a), set(b)
    if a != b:
        raise NamespaceError(f"{what} variables differ: {sorted(a ^ b)}")


def _time_probes(t0: float, t1: float, cuts: Iterable[float]) -> list[float]:
    pts = sorted({t0, t1, *[c for c in cuts if t0 <= c <= t1]})
    probes = [p for p in pts if math.isfinite(p)]
    for a, b in zip(pts, pts[1:]):
        if math.isinf(a) and math.isinf(b):
            probes.append(0.0)
        elif math.isinf(a):
            probes.append(b - 1.0)
        elif math.isinf(b):
            probes.append(a + 1.0)
        else:
            probes.append(0.5 * (a + b))
    if not probes:
        probes.append(0.0)
    return probes


def output_refines(refined: OutputSpec, original: OutputSpec) -> list[Witness]:
    """Window-wise output containment of ``refined`` in ``original``.

    At every time of an original window, the intersection of the refined boxes
    that apply at that time must lie inside the original box.
    """
    cuts = {w.t0 for w, _ in refined.windows} | {w.t1 for w, _ in refined.windows}
    bad: list[Witness] = []
    for w, box in original.windows:
        for var in box:
            for t in _time_probes(w.t0, w.t1, cuts):
                got = refined.at(t, var)
                if got is None:
                    bad.append(Witness(var, w, f"unconstrained at t={t:g}"))
                    break
                if not box[var].contains(got):
                    bad.append(Witness(var, w, f"{_fmt(got)} not within {_fmt(box[var])}"))
                    break
    return bad


def _fmt(iv: Interval) -> str:
    return "empty" if iv.is_empty else f"[{iv.lo:g}, {iv.hi:g}]"


def check_refinement(refined: RelationalContract, original: RelationalContract) -> Verdict:
    """``refined`` allows every original input and guarantees a subset of the original outputs."""
    _same_names(refined.input, original.input, "input")
    _same_names(refined.output.variables, original.output.variables, "output")
    bad = [
        Witness(v, None, f"input {_fmt(original.input[v])} not within {_fmt(refined.input[v])}")
        for v in original.input
        if not refined.input[v].contains(original.input[v])
    ]
    bad += output_refines(refined.output, original.output)
    return Verdict.of(bad)


def _grid_and_random(box: IntervalBox, n: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
    names = list(box)
    d = len(names)
    if d == 0:
        return {}
    k = max(2, int(math.floor(n ** (1.0 / d))))
    axes = [np.linspace(box[v].lo, box[v].hi, k) if box[v].width > 0 else np.array([box[v].lo]) for v in names]
    grid = np.array(list(itertools.product(*axes)), dtype=float)
    lo = np.array([box[v].lo for v in names])
    hi = np.array([box[v].hi for v in names])
    rand = rng.uniform(lo, hi, size=(n, d))
    pts = np.vstack([grid, rand])
    return {v: pts[:, i] for i, v in enumerate(names)}


@dataclass(frozen=True)
class Counterexample:
    input: dict[str, float]
    variable: str
    window: Window
    value: Interval


@dataclass(frozen=True)
class SatisfactionResult:
    ok: bool
    n_checked: int
    counterexample: Counterexample | None = None

    def __bool__(self) -> bool:
        return self.ok


def check_satisfiability(impl: Implementation, c: RelationalContract, n_samples: int = 1000, seed: int = 0) -> SatisfactionResult:
    """Sampled check that every image of ``impl`` lands in the contract's outputs.

    Inputs are a uniform grid of about ``n_samples`` points plus ``n_samples``
    random points. ``ok=False`` is a proof (the counterexample input is
    returned); ``ok=True`` is evidence only.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    rng = np.random.default_rng(seed)
    pts = _grid_and_random(c.input, n_samples, rng)
    n = len(next(iter(pts.values()))) if pts else 1
    windows = [w for w, _ in c.output.windows]
    hulls = impl.window_hulls(pts, windows)
    for w, box in c.output.windows:
        for var in sorted(box):
            lo, hi = hulls[w][var]
            iv = box[var]
            bad = ~((lo >= iv.lo) & (hi <= iv.hi))
            if bad.any():
                i = int(np.flatnonzero(bad)[0])
                point = {k: float(v[i]) for k, v in pts.items()}
                return SatisfactionResult(False, n, Counterexample(point, var, w, Interval(float(lo[i]), float(hi[i]))))
    return SatisfactionResult(True, n)


def check_composability(upstream_out: Mapping[str, Interval], downstream_in: Mapping[str, Interval]) -> Verdict:
    """Every shared variable's upstream output box lies inside the downstream input box."""
    shared = sorted(set(upstream_out) & set(downstream_in))
    if not shared:
        raise NotConnectedError()
    return Verdict.of(
        Witness(v, None, f"{_fmt(upstream_out[v])} not within {_fmt(downstream_in[v])}")
        for v in shared
        if not downstream_in[v].contains(upstream_out[v])
    )


def check_realizability(contract_box: Mapping[str, Interval], realizable_box: Mapping[str, Interval]) -> Verdict:
    """Contract sets lie inside what the supplier can realize (apply to inputs and outputs alike)."""
    missing = set(contract_box) - set(realizable_box)
    if missing:
        raise NamespaceError(f"no realizable set for {sorted(missing)}")
    return Verdict.of(
        Witness(v, None, f"{_fmt(contract_box[v])} not within {_fmt(realizable_box[v])}")
        for v in sorted(contract_box)
        if not realizable_box[v].contains(contract_box[v])
    )


class PrimaryVerdictKind(str, enum.Enum):
    OK = "ok"
    NEED_NEW_DESIGN_SOLUTION = "need_new_design_solution"
    NEED_NEW_INPUT_SET = "need_new_input_set"


REMEDIATION = {
    PrimaryVerdictKind.NEED_NEW_DESIGN_SOLUTION: "new design solution required",
    PrimaryVerdictKind.NEED_NEW_INPUT_SET: "new refined input set needs to be manually selected",
}


@dataclass(frozen=True)
class PrimaryVerdict:
    kind: PrimaryVerdictKind
    witnesses: tuple[Witness, ...] = ()
    reach_windows: tuple[tuple[str, Window, Interval], ...] = ()

    def __bool__(self) -> bool:
        return self.kind is PrimaryVerdictKind.OK

    @property
    def remediation(self) -> str | None:
        return REMEDIATION.get(self.kind)


def check_primary_refinement(
    solution_output: ReachResult, given: RelationalContract, enlarged_input: Mapping[str, Interval]
) -> PrimaryVerdict:
    """Does the design solution, driven by the enlarged inputs, refine ``given`` as a whole?

    The reachable output must sit inside every output window of ``given``
    (else a new design solution is needed), and the enlarged inputs must
    cover the given inputs (else a new input set must be chosen).
    """
    missing = given.output.variables - set(solution_output.variables)
    if missing:
        raise KeyError(f"missing reachability result for {sorted(missing)}")
    seen = []
    bad = []
    for w, box in given.output.windows:
        for var in sorted(box):
            if w == ALL_TIME:
                ra = solution_output.whole[var]
            else:
                ra = solution_output.hull_over(var, w.t0, w.t1)
            seen.append((var, w, ra))
            if not box[var].contains(ra):
                side = "lower" if ra.lo < box[var].lo else "upper"
                bad.append(Witness(var, w, f"reachable {_fmt(ra)} exceeds {_fmt(box[var])} ({side} bound)"))
    if bad:
        return PrimaryVerdict(PrimaryVerdictKind.NEED_NEW_DESIGN_SOLUTION, tuple(bad), tuple(seen))
    bad_in = [
        Witness(v, None, f"enlarged input {_fmt(enlarged_input.get(v, EMPTY))} does not cover {_fmt(given.input[v])}")
        for v in sorted(given.input)
        if v not in enlarged_input or not enlarged_input[v].contains(given.input[v])
    ]
    if bad_in:
        return PrimaryVerdict(PrimaryVerdictKind.NEED_NEW_INPUT_SET, tuple(bad_in), tuple(seen))
    return PrimaryVerdict(PrimaryVerdictKind.OK, (), tuple(seen))


def check_chain_refinement(top: RelationalContract, chain: Sequence[FunctionalContract]) -> Verdict:
    """Do the chained functional contracts refine ``top`` as a whole?

    Checks, for a chain where each contract's outputs feed the next one's
    inputs: the top inputs fit the first contract and the last outputs fit
    the top outputs; the image of the top inputs lands in the top outputs;
    and the reachable set of every intermediate and final variable (driven by
    the first contract's inputs) is inside both the producing contract's
    output box and the consuming contract's input box.
    """
    bad: list[Witness] = []
    first, last = chain[0], chain[-1]
    for v, iv in top.input.items():
        if v not in first.base.input or not first.base.input[v].contains(iv):
            bad.append(Witness(v, None, "top input not covered by the first contract"))
    last_out = last.base.output.box()
    top_out = top.output.box()
    for v, iv in top_out.items():
        if v not in last_out or not iv.contains(last_out[v]):
            bad.append(Witness(v, None, "last contract output exceeds the top output"))
    img: Mapping[str, Interval] = top.input
    ra: Mapping[str, Interval] = first.base.input
    for k, fc in enumerate(chain):
        img = fc.image({**img})
        ra = fc.image({**ra})
        out_box = fc.base.output.box()
        for v, iv in ra.items():
            if v in out_box and not out_box[v].contains(iv):
                bad.append(Witness(v, None, f"reachable {_fmt(iv)} exceeds output {_fmt(out_box[v])} of contract {k}"))
            if k + 1 < len(chain):
                nxt = chain[k + 1].base.input
                if v in nxt and not nxt[v].contains(iv):
                    bad.append(Witness(v, None, f"reachable {_fmt(iv)} exceeds input {_fmt(nxt[v])} of contract {k + 1}"))
    for v, iv in img.items():
        if v in top_out and not top_out[v].contains(iv):
            bad.append(Witness(v, None, f"image {_fmt(iv)} of the top inputs exceeds {_fmt(top_out[v])}"))
    return Verdict.of(bad)


# --------------------------------------------------------------------------
# randomized proposition suites over two-block affine chains


def _rand_iv(rng, centre_scale=10.0, width_scale=2.0) -> Interval:
    c = rng.uniform(-centre_scale, centre_scale)
    w = rng.uniform(0.0, width_scale)
    return Interval(c - w / 2, c + w / 2)


def _grow(iv: Interval, rng, scale: float, minimum: float = 0.0) -> Interval:
    a = minimum + rng.uniform(0, scale)
    b = minimum + rng.uniform(0, scale)
    return Interval(iv.lo - a, iv.hi + b)


def _sub(iv: Interval, rng) -> Interval:
    a, b = sorted(rng.uniform(iv.lo, iv.hi, size=2))
    return Interval(float(a), float(b))


def _between(inner: Interval, outer: Interval, rng) -> Interval:
    return Interval(float(rng.uniform(outer.lo, inner.lo)), float(rng.uniform(inner.hi, outer.hi)))


def _affine(out: str, inp: str, a: str, b: str) -> dict[str, Expr]:
    return {out: parse(f"{a}*{inp} + {b}", params=[a, b])}


def _fc(inp: str, in_iv: Interval, out: str, out_iv: Interval, a: str, b: str, pa: Interval, pb: Interval) -> FunctionalContract:
    base = RelationalContract(IntervalBox({inp: in_iv}), OutputSpec.static({out: out_iv}))
    return FunctionalContract(base, _affine(out, inp, a, b), IntervalBox({a: pa, b: pb}))


@dataclass
class ChainInstance:
    top: RelationalContract
    f1: FunctionalContract
    f2: FunctionalContract
    f1r: FunctionalContract
    f2r: FunctionalContract

    def describe(self) -> dict:
        def fc(c: FunctionalContract):
            return {
                "input": c.base.input.to_json(),
                "output": c.base.output.box().to_json(),
                "params": c.params.to_json(),
            }

        return {
            "top": {"input": self.top.input.to_json(), "output": self.top.output.box().to_json()},
            "f1": fc(self.f1),
            "f2": fc(self.f2),
            "f1_refined": fc(self.f1r),
            "f2_refined": fc(self.f2r),
        }


def _refine_fc(fc: FunctionalContract, rng, names: tuple[str, str, str, str]) -> FunctionalContract:
    """Random valid refinement: wider input, narrower parameters and output, image still inside."""
    inp, out, a, b = names
    x = fc.base.input[inp]
    z = fc.base.output.box()[out]
    pa, pb = _sub(fc.params[a], rng), _sub(fc.params[b], rng)
    params = IntervalBox({a: pa, b: pb})
    grow = float(rng.uniform(0, 1.0))
    for _ in range(60):
        xr = Interval(x.lo - grow * rng.uniform(0, 1), x.hi + grow * rng.uniform(0, 1))
        img = fc.image({inp: xr}, params)[out]
        if z.contains(img):
            break
        grow /= 2
    else:
        xr = x
        img = fc.image({inp: xr}, params)[out]
    zr = _between(img, z, rng)
    return _fc(inp, xr, out, zr, a, b, pa, pb)


def random_chain(rng: np.random.Generator, composable: bool = True) -> ChainInstance:
    """Two-block chain ``x -> z -> y`` satisfying the primary-refinement hypotheses.

    With ``composable=True`` the subcontracts compose and each gets an
    independent valid refinement. With ``composable=False`` the downstream
    input box is strictly smaller than the upstream output box, the
    downstream contract is kept as its own refinement, and the upstream
    refinement widens its input until its reachable output leaves the
    downstream input box.
    """
    pa1 = _rand_iv(rng, 3, 1)
    pb1 = _rand_iv(rng, 5, 1)
    pa2 = _rand_iv(rng, 3, 1)
    pb2 = _rand_iv(rng, 5, 1)
    if not composable:
        # keep the upstream gain away from zero so widening the input widens the image
        s = 1.0 if rng.uniform() < 0.5 else -1.0
        lo = rng.uniform(0.5, 2.0)
        pa1 = Interval(s * lo, s * lo) if s > 0 else Interval(-lo, -lo)
        pa1 = Interval(min(pa1.lo, pa1.lo + s * rng.uniform(0, 1)), max(pa1.hi, pa1.hi + s * rng.uniform(0, 1)))
    x0 = _rand_iv(rng, 10, 4)
    x1 = _grow(x0, rng, 1.0)
    probe1 = _fc("x", x1, "z", Interval.entire(), "a1", "b1", pa1, pb1)
    ra_z = probe1.image()["z"]
    if composable:
        z1 = _grow(ra_z, rng, 2.0, 1e-3)
        z2 = _grow(z1, rng, 2.0)
    else:
        z2 = _grow(ra_z, rng, 1.0, 1e-3)
    probe2 = _fc("z", z2, "y", Interval.entire(), "a2", "b2", pa2, pb2)
    ra_y = probe2.image()["y"]
    y2 = _grow(ra_y, rng, 2.0, 1e-3)
    y0 = _grow(y2, rng, 2.0)
    top = RelationalContract(IntervalBox({"x": x0}), OutputSpec.static({"y": y0}))
    if composable:
        f1 = _fc("x", x1, "z", z1, "a1", "b1", pa1, pb1)
        f2 = _fc("z", z2, "y", y2, "a2", "b2", pa2, pb2)
        f1r = _refine_fc(f1, rng, ("x", "z", "a1", "b1"))
        f2r = _refine_fc(f2, rng, ("z", "y", "a2", "b2"))
        return ChainInstance(top, f1, f2, f1r, f2r)
    grow = 1.0
    while True:
        x1r = Interval(x1.lo - grow, x1.hi + grow)
        img = probe1.image({"x": x1r})["z"]
        if not z2.contains(img):
            break
        grow *= 2
    z1 = _grow(z2.hull(img), rng, 1.0, 1e-3)
    f1 = _fc("x", x1, "z", z1, "a1", "b1", pa1, pb1)
    f2 = _fc("z", z2, "y", y2, "a2", "b2", pa2, pb2)
    f1r = _fc("x", x1r, "z", z1, "a1", "b1", pa1, pb1)
    return ChainInstance(top, f1, f2, f1r, f2)


def noncomposable_counterexample() -> ChainInstance:
    """Smallest hand-built case where a non-composable decomposition breaks under refinement.

    ``z = x`` feeds ``y = z``; the downstream input box ``[0,2]`` is strictly
    inside the upstream output box ``[0,3]`` and still holds the reachable
    ``[0,1]``. Keeping the downstream contract and widening the upstream input
    to ``[0,2.5]`` is a valid refinement of each block alone, yet ``z`` can now
    reach 2.5.
    """
    zero = Interval(0.0, 0.0)
    one = Interval(1.0, 1.0)
    top = RelationalContract(IntervalBox({"x": Interval(0, 1)}), OutputSpec.static({"y": Interval(0, 2)}))
    f1 = _fc("x", Interval(0, 1), "z", Interval(0, 3), "a1", "b1", one, zero)
    f2 = _fc("z", Interval(0, 2), "y", Interval(0, 2), "a2", "b2", one, zero)
    f1r = _fc("x", Interval(0, 2.5), "z", Interval(0, 3), "a1", "b1", one, zero)
    return ChainInstance(top, f1, f2, f1r, f2)


@dataclass
class SuiteResult:
    passed: int = 0
    failed: int = 0
    failures: list[dict] = field(default_factory=list)

    def record(self, ok: bool, instance: ChainInstance, why: str) -> None:
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            self.failures.append({"reason": why, "instance": instance.describe()})


@dataclass
class PropositionReport:
    composable_refinement: SuiteResult
    implementation_satisfaction: SuiteResult
    noncomposable_detection: SuiteResult

    @property
    def ok(self) -> bool:
        return not (
            self.composable_refinement.failed
            or self.implementation_satisfaction.failed
            or self.noncomposable_detection.failed
        )


def _fc_valid(fc: FunctionalContract, inp: str, out: str) -> bool:
    return fc.base.output.box()[out].contains(fc.image()[out])


def _check_detected(inst: ChainInstance) -> tuple[bool, str]:
    flagged = not check_composability(inst.f1.base.output.box(), inst.f2.base.input)
    primary_ok = bool(check_chain_refinement(inst.top, [inst.f1, inst.f2]))
    independent_ok = (
        check_refinement(inst.f1r.base, inst.f1.base).ok
        and check_refinement(inst.f2r.base, inst.f2.base).ok
        and _fc_valid(inst.f1r, "x", "z")
    )
    secondary_fails = not check_chain_refinement(inst.top, [inst.f1r, inst.f2r])
    if not (primary_ok and independent_ok):
        return False, "generator broke the hypotheses"
    if not flagged:
        return False, "non-composable pair not flagged"
    if not secondary_fails:
        return False, "refinement failure not detected"
    return True, ""


def proposition_suite(seed: int = 0, n_instances: int = 1000, n_samples: int = 100) -> PropositionReport:
    """Randomized checks of the three composability propositions on affine chains."""
    rng = np.random.default_rng(seed)
    p1, p2, p3 = SuiteResult(), SuiteResult(), SuiteResult()
    for _ in range(n_instances):
        inst = random_chain(rng, composable=True)
        hyp = (
            check_chain_refinement(inst.top, [inst.f1, inst.f2]).ok
            and check_composability(inst.f1.base.output.box(), inst.f2.base.input).ok
            and check_refinement(inst.f1r.base, inst.f1.base).ok
            and check_refinement(inst.f2r.base, inst.f2.base).ok
            and _fc_valid(inst.f1r, "x", "z")
            and _fc_valid(inst.f2r, "z", "y")
        )
        if not hyp:
            p1.record(False, inst, "generator broke the hypotheses")
            p2.record(False, inst, "generator broke the hypotheses")
            continue
        composed = check_composability(inst.f1r.base.output.box(), inst.f2r.base.input)
        refines = check_chain_refinement(inst.top, [inst.f1r, inst.f2r])
        p1.record(composed.ok and refines.ok, inst, "; ".join(w.detail for w in composed.witnesses + refines.witnesses))

        # point implementations inside the refined subcontracts
        point = {k: float(rng.uniform(iv.lo, iv.hi)) for k, iv in {**inst.f1r.params, **inst.f2r.params}.items()}
        impl = StaticImplementation({"z": inst.f1r.structure["z"], "y": inst.f2r.structure["y"]}, point)
        sat = check_satisfiability(impl, inst.top, n_samples=n_samples, seed=int(rng.integers(2**31)))
        p2.record(sat.ok, inst, "" if sat.ok else f"counterexample {sat.counterexample}")

        bad = random_chain(rng, composable=False)
        ok, why = _check_detected(bad)
        p3.record(ok, bad, why)
    return PropositionReport(p1, p2, p3)
