"""Command line entry point."""

from __future__ import annotations

import argparse
import logging
import sys

from .pipeline import Flags, emit_report, run, write_outputs
from .specfile import bundled


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="reqdecomp",
        description="Decompose a system contract into supplier subcontracts.",
        epilog="exit codes: 0 success, 2 spec error, 3 refinement failure, 4 supplier conflict, "
        "5 lower-bound violation, 6 optimization infeasible",
    )
    ap.add_argument("--spec", required=True, help="spec file, or bundled:NAME for a shipped example")
    ap.add_argument("--report", choices=("text", "structured"), default="text")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--mc-trajectories", type=int, help="sampled trajectories for the soundness check (0 skips it)")
    ap.add_argument("--step", type=float, help="integration step in seconds")
    ap.add_argument("--subdivision", type=int, help="pieces per uncertain input or parameter")
    ap.add_argument("--trace-propagation", action="store_true", help="include every domain change in the report")
    ap.add_argument("--out", help="directory for delimited envelopes, report.json and figures")
    ap.add_argument("--no-figures", action="store_true", help="with --out, skip the PNG figures")
    ap.add_argument("-v", "--verbose", action="store_true", help="log stage timings to stderr")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    spec = bundled(args.spec.split(":", 1)[1]) if args.spec.startswith("bundled:") else args.spec
    flags = Flags(
        seed=args.seed,
        mc_trajectories=args.mc_trajectories,
        step=args.step,
        subdivision=args.subdivision,
        trace_propagation=args.trace_propagation,
    )
    report = run(spec, flags)
    sys.stdout.write(emit_report(report, args.report))
    if args.out:
        for p in write_outputs(report, args.out, figures=not args.no_figures):
            logging.getLogger(__name__).info("wrote %s", p)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
