"""Figures for a pipeline run, written as PNG files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}


def _pick(rr, wanted) -> list[str]:
    """The wanted variables when all are present, else the first two."""
    return list(wanted) if all(v in rr.variables for v in wanted) else list(rr.variables[:2])


def envelope_figure(r, variables=("v", "u")):
    """Reachable-set envelope against sampled trajectories, one panel per variable."""
    rr, mc = r.reach_result, r.mc_result
    variables = _pick(rr, variables)
    with plt.rc_context(RC):
        fig, axes = plt.subplots(len(variables), 1, figsize=(6, 2.2 * len(variables)), sharex=True, squeeze=False)
        for ax, v in zip(axes[:, 0], variables):
            j = rr.variables.index(v)
            ax.fill_between(rr.t_lo, rr.lo[:, j], rr.hi[:, j], step="post", color="0.8", lw=0, label="reachable set")
            if mc is not None:
                k = mc.variables.index(v)
                ax.plot(mc.t_lo, mc.lo[:, k], color="C0", lw=0.8, label="sampled envelope")
                ax.plot(mc.t_lo, mc.hi[:, k], color="C0", lw=0.8)
            ax.set_ylabel(v)
        axes[-1, 0].set_xlabel("t [s]")
        axes[0, 0].legend(loc="lower right", frameon=False)
        fig.tight_layout()
    return fig


def window_boxes_figure(r, x="v", y="u"):
    """Reachable boxes in the (x, y) plane, one per reported time window."""
    rr = r.reach_result
    x, y = _pick(rr, (x, y))
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.5, 3.5))
        for n, (w, box) in enumerate(sorted(rr.windows.items())):
            bx, by = box[x], box[y]
            ax.add_patch(Rectangle((bx.lo, by.lo), bx.width, by.width, fill=False, ec=f"C{n}", lw=1.2, label=f"t ∈ {w.key}"))
        ax.autoscale_view()
        ax.margins(0.05)
        ax.set_xlabel(x)
        ax.set_ylabel(y)
        ax.legend(frameon=False)
        fig.tight_layout()
    return fig


def bands_figure(r):
    """RA, RE and the chosen subcontract per variable, each scaled to its RE interval."""
    opt = r.stage("optimization")
    rows = opt.data["variables"]
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(6, 0.45 * len(rows) + 0.8))
        for n, (v, e) in enumerate(rows.items()):
            lo, hi = e["RE"]
            span = (hi - lo) or 1.0

            def s(a):
                return (a - lo) / span

            ax.plot([0, 1], [n, n], color="0.8", lw=6, solid_capstyle="butt")
            ax.plot([s(e["optimal"][0]), s(e["optimal"][1])], [n, n], color="C0", lw=3, solid_capstyle="butt")
            ax.plot([s(e["RA"][0]), s(e["RA"][1])], [n, n], color="k", lw=1)
        ax.set_yticks(range(len(rows)))
        ax.set_yticklabels(list(rows))
        ax.invert_yaxis()
        ax.set_xlabel("position within the realizable set")
        fig.tight_layout()
    return fig


def render_all(r, outdir) -> list[Path]:
    out = Path(outdir)
    written = []
    jobs = [("envelope.png", envelope_figure), ("window_boxes.png", window_boxes_figure)]
    opt = r.stage("optimization")
    if opt is not None and "variables" in opt.data:
        jobs.append(("subcontracts.png", bands_figure))
    for name, make in jobs:
        fig = make(r)
        p = out / name
        fig.savefig(p)
        plt.close(fig)
        written.append(p)
    return written
