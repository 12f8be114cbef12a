"""Reachable-set over-approximation for design networks, and a sampling oracle.

The closed-loop state is the vector of integrator outputs and controller
internal states. Uncertain external inputs and parameters are appended as
constant coordinates, so the whole uncertainty lives in one initial box
that can be subdivided uniformly.

Each sub-box is propagated as ``c + B r`` (point centre ``c``, point matrix
``B``, interval vector ``r``) with an Euler mean-value step plus a Lagrange
remainder bounded on an a-priori enclosure, re-orthogonalising ``B`` by QR
every step to keep wrapping under control. All sub-boxes advance together
as one numpy batch.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np

from .expr import evaluate, identifiers
from .interval import Interval, IntervalBox, UnboundedQuotientError
from .ivec import ADI, IArr, imatmul, imatvec
from .network import BlockKind, DesignSolution, algebraic_order

BLOWUP_MESSAGE = "enclosure blow-up; reduce step or increase subdivision"


class ReachDivergenceError(RuntimeError):
    def __init__(self, detail: str = ""):
        msg = BLOWUP_MESSAGE if not detail else f"{BLOWUP_MESSAGE} ({detail})"
        super().__init__(msg)
        self.detail = detail


@dataclass(frozen=True, order=True)
class Window:
    t0: float
    t1: float

    def __post_init__(self):
        if not self.t0 <= self.t1:
            raise ValueError(f"window start {self.t0} after end {self.t1}")

    @property
    def key(self) -> str:
        return f"[{self.t0:g},{self.t1:g}]"


def _windows(windows: Iterable[Window | tuple[float, float]] | None) -> list[Window]:
    out = []
    for w in windows or ():
        out.append(w if isinstance(w, Window) else Window(float(w[0]), float(w[1])))
    return sorted(set(out))


@dataclass(frozen=True)
class ReachResult:
    """Per-variable enclosures.

    ``lo``/``hi`` hold one row per envelope entry; entry ``n`` covers the time
    span ``[t_lo[n], t_hi[n]]`` (a step for the validated engine, a single
    grid instant for the sampling oracle).
    """

    variables: tuple[str, ...]
    t_lo: np.ndarray
    t_hi: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    whole: Mapping[str, Interval]
    windows: Mapping[Window, Mapping[str, Interval]]

    def window(self, var: str, w: Window | tuple[float, float]) -> Interval:
        w = w if isinstance(w, Window) else Window(*w)
        return self.windows[w][var]

    def envelope(self, var: str) -> list[tuple[tuple[float, float], Interval]]:
        j = self.variables.index(var)
        return [
            ((float(a), float(b)), Interval(float(lo), float(hi)))
            for a, b, lo, hi in zip(self.t_lo, self.t_hi, self.lo[:, j], self.hi[:, j])
        ]

    def hull_over(self, var: str, t0: float, t1: float) -> Interval:
        """Hull of the envelope entries whose time span meets ``[t0, t1]``."""
        j = self.variables.index(var)
        mask = (self.t_hi >= t0) & (self.t_lo <= t1)
        if not mask.any():
            raise ValueError(f"[{t0:g},{t1:g}] lies outside the horizon")
        return Interval(float(self.lo[mask, j].min()), float(self.hi[mask, j].max()))

    def as_box(self) -> IntervalBox:
        return IntervalBox(self.whole)

    def write_delimited(self, fh: TextIO, delimiter: str = ",") -> None:
        """Per-step envelope as delimiter-separated text, one row per entry."""
        head = ["t_lo", "t_hi"]
        for v in self.variables:
            head += [f"{v}_lo", f"{v}_hi"]
        fh.write(delimiter.join(head) + "\n")
        for n in range(len(self.t_lo)):
            row = [repr(float(self.t_lo[n])), repr(float(self.t_hi[n]))]
            for j in range(len(self.variables)):
                row += [repr(float(self.lo[n, j])), repr(float(self.hi[n, j]))]
            fh.write(delimiter.join(row) + "\n")


@dataclass(frozen=True)
class McEnvelope(ReachResult):
    n_samples: int = 0
    failed: tuple[int, ...] = ()


def _finish(variables, t_lo, t_hi, lo, hi, windows: list[Window], cls=ReachResult, **extra):
    whole = {v: Interval(float(lo[:, j].min()), float(hi[:, j].max())) for j, v in enumerate(variables)}
    per_window = {}
    for w in windows:
        mask = (t_hi >= w.t0) & (t_lo <= w.t1)
        if not mask.any():
            raise ValueError(f"window {w.key} lies outside the horizon")
        per_window[w] = {
            v: Interval(float(lo[mask, j].min()), float(hi[mask, j].max())) for j, v in enumerate(variables)
        }
    return cls(tuple(variables), t_lo, t_hi, lo, hi, whole, per_window, **extra)


# --------------------------------------------------------------------------
# compiled system


class _System:
    def __init__(self, ds: DesignSolution):
        self.ds = ds
        self.variables = ds.variable_ids
        self.state_blocks = [b for b in ds.blocks if b.kind is not BlockKind.ALGEBRAIC]
        self.states = [b.output if b.kind is BlockKind.INTEGRATOR else b.state for b in self.state_blocks]
        names: set[str] = set()
        for b in ds.blocks:
            for e in (b.expr, b.derivative, b.initial):
                if e is not None:
                    vs, ps = identifiers(e)
                    names |= vs | ps
        self.externals = [n for n in ds.external_inputs if n in names]
        self.params = [n for n in ds.params if n in names]
        self.uncertain = self.externals + self.params
        self.coords = self.states + self.uncertain
        self.order = [ds.block(bid) for bid in algebraic_order(ds)]
        self.u_box = [
            (ds.external_inputs[n] if n in ds.external_inputs else ds.params[n]) for n in self.uncertain
        ]

    @property
    def n(self) -> int:
        return len(self.coords)

    def network(self, coords: Sequence, lift) -> dict:
        vals = dict(zip(self.coords, coords))
        for b in self.state_blocks:
            if b.kind is BlockKind.INTEGRATOR:
                vals[b.output] = vals[b.output]
        for b in self.order:
            vals[b.output] = evaluate(b.expr, vals, lift)
        return vals

    def derivatives(self, vals: Mapping, lift) -> list:
        return [evaluate(b.derivative, vals, lift) for b in self.state_blocks]

    def initial(self, uvals: Sequence, lift) -> list:
        env = dict(zip(self.uncertain, uvals))
        return [evaluate(b.initial, env, lift) for b in self.state_blocks]


def _ad_seed(x: IArr) -> list[ADI]:
    batch, d = x.lo.shape
    out = []
    for i in range(d):
        g = np.zeros((batch, d))
        g[:, i] = 1.0
        out.append(ADI(x[:, i], IArr(g, g)))
    return out


def _stack(items: Sequence[IArr], batch: int) -> IArr:
    lo = np.stack([np.broadcast_to(a.lo, (batch,)) for a in items], axis=-1)
    hi = np.stack([np.broadcast_to(a.hi, (batch,)) for a in items], axis=-1)
    return IArr(lo, hi)


def _ad_lift(batch: int, d: int):
    return lambda c: ADI.lift_const(c, batch, d)


def _ad_vals(sys: _System, x: IArr):
    """Network values, derivative vector and their gradients over box ``x``."""
    batch, d = x.lo.shape
    lift = _ad_lift(batch, d)
    vals = sys.network(_ad_seed(x), lift)
    ders = sys.derivatives(vals, lift)
    zero = ADI.lift_const(0.0, batch, d)
    f_all = ders + [zero] * len(sys.uncertain)
    f = _stack([a.val for a in f_all], batch)
    jlo = np.stack([a.full_grad().lo for a in f_all], axis=1)
    jhi = np.stack([a.full_grad().hi for a in f_all], axis=1)
    return vals, f, IArr(jlo, jhi)


def _iarr_vals(sys: _System, x: IArr):
    batch = x.lo.shape[0]
    lift = lambda c: IArr.const(c, (batch,))
    cols = [x[:, i] for i in range(x.lo.shape[1])]
    vals = sys.network(cols, lift)
    ders = sys.derivatives(vals, lift)
    zero = IArr.const(0.0, (batch,))
    return vals, _stack(ders + [zero] * len(sys.uncertain), batch)


def _point(a: np.ndarray) -> IArr:
    return IArr(a, a)


def _row(g: IArr) -> IArr:
    return IArr(g.lo[:, None, :], g.hi[:, None, :])


def _qinv_enclosure(q: np.ndarray) -> IArr:
    """Rigorous enclosure of ``inv(q)`` for a numerically orthogonal batch ``q``."""
    n = q.shape[-1]
    qt = np.swapaxes(q, -1, -2)
    e = imatmul(_point(qt), _point(q))
    eye = np.eye(n)
    dev = np.maximum(np.abs(e.lo - eye), np.abs(e.hi - eye))
    norm_e = dev.sum(axis=-1).max(axis=-1)
    if np.any(norm_e >= 0.5):
        raise ReachDivergenceError("ill-conditioned basis")
    norm_qt = np.abs(qt).sum(axis=-1).max(axis=-1)
    delta = np.nextafter(norm_e / (1.0 - norm_e) * norm_qt * (1 + 4 * np.finfo(float).eps), np.inf)
    d = delta[:, None, None]
    return IArr(np.nextafter(qt - d, -np.inf), np.nextafter(qt + d, np.inf))


def _subdivide(boxes: Sequence[Interval], ks: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    edges = []
    for iv, k in zip(boxes, ks):
        if iv.width == 0 or k == 1:
            edges.append([(iv.lo, iv.hi)])
            continue
        pts = np.linspace(iv.lo, iv.hi, k + 1)
        pts[0], pts[-1] = iv.lo, iv.hi
        edges.append(list(zip(pts[:-1], pts[1:])))
    combos = list(itertools.product(*edges))
    lo = np.array([[c[0] for c in combo] for combo in combos], dtype=float).reshape(len(combos), len(boxes))
    hi = np.array([[c[1] for c in combo] for combo in combos], dtype=float).reshape(len(combos), len(boxes))
    return lo, hi


@dataclass
class ReachConfig:
    step: float | None = None
    subdivision: int | Mapping[str, int] = 4
    subdivide_params: bool = True
    blowup_factor: float = 10.0
    max_width: float = 1e6
    realizable: Mapping[str, Interval] | None = None


def _initial_set(sys: _System, k: int | Mapping[str, int], params_too: bool):
    """Initial set as ``x_s = c_s + Bs rs + Bu ru`` with ``ru = u - u_c``."""
    if isinstance(k, Mapping):
        ks = [max(1, int(k.get(n, 1))) for n in sys.uncertain]
    else:
        ks = [k if (n in sys.externals or params_too) else 1 for n in sys.uncertain]
    ulo, uhi = _subdivide(sys.u_box, ks)
    batch, du = ulo.shape
    ns = len(sys.states)
    ubox = IArr(ulo, uhi)
    uc = 0.5 * ulo + 0.5 * uhi
    ru = ubox - _point(uc)
    # initial map: value at the centre plus mid-Jacobian times the offset
    init = sys.initial(_ad_seed(ubox), _ad_lift(batch, du))
    phi_c = _stack(sys.initial([_point(uc[:, i]) for i in range(du)], lambda c: IArr.const(c, (batch,))), batch)
    jac = IArr(np.stack([a.full_grad().lo for a in init], axis=1), np.stack([a.full_grad().hi for a in init], axis=1))
    bu = jac.mid()
    cs = phi_c.mid()
    rs = imatvec(jac - _point(bu), ru) + (phi_c - _point(cs))
    bs = np.broadcast_to(np.eye(ns), (batch, ns, ns)).copy()
    return cs, uc, bs, bu, rs, ru


def _apriori(sys: _System, x: IArr, h: float, guess: IArr | None):
    """Box ``e`` with ``x + [0,h] f(e) ⊆ e``, plus ``f(e)``.

    ``guess`` is a derivative range to start from (the previous step's is
    usually good enough to verify on the first try).
    """
    hspan = IArr(0.0, h)
    if guess is None:
        _, guess = _iarr_vals(sys, x)
    g = guess
    for _ in range(30):
        w = g.hi - g.lo
        infl = 0.1 * w + 1e-9 * (1 + np.abs(g.mid()))
        g = IArr(g.lo - infl, g.hi + infl)
        e = x + hspan * g
        try:
            _, fe = _iarr_vals(sys, e)
        except UnboundedQuotientError as exc:
            raise ReachDivergenceError("a-priori enclosure hits a singularity") from exc
        if np.all((g.lo <= fe.lo) & (fe.hi <= g.hi)):
            return e, fe
        g = g.hull(fe)
    raise ReachDivergenceError("no a-priori enclosure; step too large")


def reach(
    ds: DesignSolution,
    windows: Iterable[Window | tuple[float, float]] | None = None,
    config: ReachConfig | None = None,
) -> ReachResult:
    """Validated enclosure of every network variable over ``[0, ds.horizon]``."""
    cfg = config or ReachConfig()
    h = float(cfg.step if cfg.step is not None else ds.step)
    if not h > 0 or not math.isfinite(ds.horizon) or ds.horizon <= 0:
        raise ValueError("step and horizon must be positive and finite")
    sys = _System(ds)
    steps = max(1, int(round(ds.horizon / h)))
    wins = _windows(windows)
    try:
        return _integrate(sys, h, steps, wins, cfg)
    except (UnboundedQuotientError, FloatingPointError) as exc:
        raise ReachDivergenceError(str(exc)) from exc


def _cat(a: IArr, b: IArr) -> IArr:
    return IArr(np.concatenate([a.lo, b.lo], axis=1), np.concatenate([a.hi, b.hi], axis=1))


def _vcat(*parts: IArr) -> IArr:
    return IArr(np.concatenate([p.lo for p in parts]), np.concatenate([p.hi for p in parts]))


def _integrate(sys: _System, h: float, steps: int, wins: list[Window], cfg: ReachConfig) -> ReachResult:
    k = cfg.subdivision if isinstance(cfg.subdivision, Mapping) else max(1, int(cfg.subdivision))
    cs, uc, bs, bu, rs, ru = _initial_set(sys, k, cfg.subdivide_params)
    batch, ns = cs.shape
    nvar = len(sys.variables)
    lo = np.empty((steps, nvar))
    hi = np.empty((steps, nvar))
    t_grid = np.arange(steps + 1) * h
    limits = np.full(ns, cfg.max_width)
    if cfg.realizable:
        for i, s in enumerate(sys.states):
            if s in cfg.realizable and math.isfinite(cfg.realizable[s].width):
                limits[i] = min(limits[i], cfg.blowup_factor * cfg.realizable[s].width)
    hspan = IArr(0.0, h)
    hpt = IArr(h)
    h_half_sq = IArr(np.nextafter(h * h / 2, -np.inf), np.nextafter(h * h / 2, np.inf))
    eye = _point(np.eye(ns))
    u_box = _point(uc) + ru
    xs = _point(cs) + imatvec(_point(bs), rs) + imatvec(_point(bu), ru)

    f_guess = None
    halves = (slice(0, batch), slice(batch, 2 * batch))
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(steps):
            x = _cat(xs, u_box)
            c = np.concatenate([cs, uc], axis=1)
            e, f_guess = _apriori(sys, x, h, f_guess)
            # one differentiated pass over the start box and the a-priori box; the centre needs values only
            vals2, f2, j2 = _ad_vals(sys, _vcat(x, e))
            f_e = f2[halves[1]]
            j_x, j_e = (j2[p] for p in halves)
            vals_c, f_c = _iarr_vals(sys, _point(c))
            rem = h_half_sq * imatvec(j_e, f_e)[:, :ns]
            m = eye + hpt * j_x[:, :ns, :ns]
            mbs = imatmul(m, _point(bs))
            mbu = imatmul(m, _point(bu)) + hpt * j_x[:, :ns, ns:]
            y = _point(cs) + hpt * f_c[:, :ns] + rem
            cs_new = y.mid()
            bu_new = mbu.mid()
            bp = mbs.mid()
            score = np.linalg.norm(bp, axis=1) * (rs.hi - rs.lo)
            perm = np.argsort(-score, axis=1, kind="stable")
            q, _ = np.linalg.qr(np.take_along_axis(bp, perm[:, None, :], axis=2))
            qinv = _qinv_enclosure(q)
            direct = y + imatvec(mbs, rs) + imatvec(mbu, ru)
            rest = imatvec(mbu - _point(bu_new), ru) + (y - _point(cs_new))
            rs_old = rs
            rs = imatvec(imatmul(qinv, mbs), rs) + imatvec(qinv, rest)
            xs_new = _point(cs_new) + imatvec(_point(q), rs) + imatvec(_point(bu_new), ru)
            xs_new = IArr(np.maximum(xs_new.lo, direct.lo), np.minimum(xs_new.hi, direct.hi))

            # enclosure of the state over the whole step
            x_new = _cat(xs_new, u_box)
            fwd = x + hspan * f_e
            bwd = x_new - hspan * f_e
            span = IArr(
                np.maximum(np.maximum(e.lo, fwd.lo), bwd.lo),
                np.minimum(np.minimum(e.hi, fwd.hi), bwd.hi),
            )
            vals_span, f_guess = _iarr_vals(sys, span)
            nat = _stack([vals_span[v] for v in sys.variables], batch)
            # mean value at the step start (kept in r coordinates), then
            # drift along the flow
            gval = _stack([vals_c[v] for v in sys.variables], batch)
            gl = np.stack([vals2[v].full_grad().lo for v in sys.variables], axis=1)
            gh = np.stack([vals2[v].full_grad().hi for v in sys.variables], axis=1)
            gx = IArr(gl[halves[0]], gh[halves[0]])
            ge = IArr(gl[halves[1]], gh[halves[1]])
            gs = gx[:, :, :ns]
            row_s = imatmul(gs, _point(bs))
            row_u = imatmul(gs, _point(bu)) + gx[:, :, ns:]
            g0 = gval + imatvec(row_s, rs_old) + imatvec(row_u, ru)
            mv = g0 + hspan * imatvec(ge, f_e)
            lo[k] = np.maximum(nat.lo, mv.lo).min(axis=0)
            hi[k] = np.minimum(nat.hi, mv.hi).max(axis=0)
            w = span.hi[:, :ns] - span.lo[:, :ns]
            if not np.all(np.isfinite(w)) or np.any(w > limits):
                bad = [sys.states[i] for i in range(ns) if not np.all(w[:, i] <= limits[i])]
                raise ReachDivergenceError(f"state {', '.join(bad)} at t={t_grid[k + 1]:g}")
            cs, bs, bu, xs = cs_new, q, bu_new, xs_new
    return _finish(sys.variables, t_grid[:-1].copy(), t_grid[1:].copy(), lo, hi, wins)


# --------------------------------------------------------------------------
# sampling oracle


def _rk4_sweep(sys: _System, u: np.ndarray, h: float, steps: int, record) -> None:
    """Integrate every row of ``u`` (uncertain-quantity samples) with classical RK4.

    ``record(k, rows)`` receives the network values at grid point ``k`` as an
    array of shape ``(n_variables, n_samples)``.
    """
    n = len(u)
    ucols = [u[:, i] for i in range(u.shape[1])]

    def rhs(s):
        vals = sys.network(list(s) + ucols, float)
        ders = sys.derivatives(vals, float)
        return vals, [np.broadcast_to(np.asarray(d, dtype=float), (n,)) for d in ders]

    def rows(vals):
        return np.stack([np.broadcast_to(np.asarray(vals[v], dtype=float), (n,)) for v in sys.variables])

    with np.errstate(all="ignore"):
        s = [np.broadcast_to(np.asarray(x0, dtype=float), (n,)).copy() for x0 in sys.initial(ucols, float)]
        for k in range(steps):
            vals, k1 = rhs(s)
            record(k, rows(vals))
            _, k2 = rhs([a + 0.5 * h * d for a, d in zip(s, k1)])
            _, k3 = rhs([a + 0.5 * h * d for a, d in zip(s, k2)])
            _, k4 = rhs([a + h * d for a, d in zip(s, k3)])
            s = [a + h / 6.0 * (d1 + 2 * d2 + 2 * d3 + d4) for a, d1, d2, d3, d4 in zip(s, k1, k2, k3, k4)]
        vals, _ = rhs(s)
        record(steps, rows(vals))


def _sample_matrix(sys: _System, samples: Mapping[str, np.ndarray]) -> np.ndarray:
    missing = [n for n in sys.uncertain if n not in samples]
    if missing:
        raise KeyError(f"no samples for {', '.join(missing)}")
    cols = [np.atleast_1d(np.asarray(samples[n], dtype=float)) for n in sys.uncertain]
    n = max((len(c) for c in cols), default=1)
    return np.stack([np.broadcast_to(c, (n,)) for c in cols], axis=1).reshape(n, len(cols))


def simulate_hulls(
    ds: DesignSolution,
    samples: Mapping[str, np.ndarray],
    windows: Iterable[Window | tuple[float, float]],
    step: float | None = None,
) -> dict[Window, dict[str, tuple[np.ndarray, np.ndarray]]]:
    """Per-sample hull of every variable over each window, from RK4 trajectories.

    ``samples`` maps every uncertain external input and parameter name to an
    array of point values (one entry per trajectory).
    """
    h = float(step if step is not None else ds.step)
    sys = _System(ds)
    steps = max(1, int(round(ds.horizon / h)))
    u = _sample_matrix(sys, samples)
    wins = _windows(windows)
    t = np.arange(steps + 1) * h
    acc = {w: [np.full((len(sys.variables), len(u)), np.inf), np.full((len(sys.variables), len(u)), -np.inf)] for w in wins}

    def record(k, rows):
        for w in wins:
            if w.t0 <= t[k] <= w.t1:
                lo, hi = acc[w]
                np.minimum(lo, rows, out=lo)
                np.maximum(hi, rows, out=hi)

    _rk4_sweep(sys, u, h, steps, record)
    return {w: {v: (acc[w][0][j], acc[w][1][j]) for j, v in enumerate(sys.variables)} for w in wins}


def mc_envelope(
    ds: DesignSolution,
    n_traj: int,
    windows: Iterable[Window | tuple[float, float]] | None = None,
    *,
    seed: int = 0,
    step: float | None = None,
    corners: bool = True,
) -> McEnvelope:
    """Envelope of sampled trajectories integrated with classical RK4.

    Sample 0 is the box centre, the rest are uniform draws; with ``corners``
    every vertex of the uncertainty box is added as well. Trajectories that
    overflow are dropped and reported in ``failed``.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be at least 1")
    h = float(step if step is not None else ds.step)
    sys = _System(ds)
    steps = max(1, int(round(ds.horizon / h)))
    lo_b = np.array([iv.lo for iv in sys.u_box], dtype=float)
    hi_b = np.array([iv.hi for iv in sys.u_box], dtype=float)
    rng = np.random.default_rng(seed)
    samples = [0.5 * lo_b + 0.5 * hi_b]
    if n_traj > 1:
        samples.extend(rng.uniform(lo_b, hi_b, size=(n_traj - 1, len(lo_b))))
    if corners and len(lo_b):
        for bits in itertools.product((0, 1), repeat=len(lo_b)):
            samples.append(np.where(np.array(bits, dtype=bool), hi_b, lo_b))
    u = np.array(samples, dtype=float).reshape(len(samples), len(lo_b))
    nvar = len(sys.variables)
    lo = np.empty((steps + 1, nvar))
    hi = np.empty((steps + 1, nvar))
    alive = np.ones(len(u), dtype=bool)

    def record(k, rows):
        alive[:] &= np.all(np.isfinite(rows), axis=0)
        if not alive.any():
            raise ReachDivergenceError("every sampled trajectory overflowed")
        lo[k] = rows[:, alive].min(axis=1)
        hi[k] = rows[:, alive].max(axis=1)

    _rk4_sweep(sys, u, h, steps, record)
    t = np.arange(steps + 1) * h
    failed = tuple(int(i) for i in np.flatnonzero(~alive))
    return _finish(
        sys.variables, t, t.copy(), lo, hi, _windows(windows), cls=McEnvelope, n_samples=len(u), failed=failed
    )


@dataclass(frozen=True)
class LowerBoundWitness:
    variable: str
    reach: Interval
    candidate: Interval
    bound: str  # "lower", "upper" or "both"


@dataclass(frozen=True)
class LowerBoundCheck:
    ok: bool
    witnesses: tuple[LowerBoundWitness, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def check_lower_bound(result: ReachResult, candidate: Mapping[str, Interval]) -> LowerBoundCheck:
    """Does every candidate component contain the whole-horizon reachable interval?"""
    bad = []
    for v in sorted(candidate):
        if v not in result.whole:
            continue
        ra, cand = result.whole[v], candidate[v]
        if cand.contains(ra):
            continue
        lo_bad = cand.is_empty or ra.lo < cand.lo
        hi_bad = cand.is_empty or ra.hi > cand.hi
        bound = "both" if lo_bad and hi_bad else ("lower" if lo_bad else "upper")
        bad.append(LowerBoundWitness(v, ra, cand, bound))
    return LowerBoundCheck(not bad, tuple(bad))
