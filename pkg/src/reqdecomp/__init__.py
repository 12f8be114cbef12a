"""Contract-based decomposition of system requirements into supplier subcontracts."""

from .contracts import (
    FunctionalContract,
    OutputSpec,
    PrimaryVerdictKind,
    RelationalContract,
    check_composability,
    check_primary_refinement,
    check_realizability,
    check_refinement,
    check_satisfiability,
)
from .csp import Contracted, Infeasible, LowerBoundViolation, RealizableSets, build_csp, classify, propagate
from .expr import parse
from .interval import EMPTY, Interval, IntervalBox
from .network import Block, DesignSolution, Variable, classify_system_level, incidence, make_block, validate
from .optimizer import SubcontractSet, build_problem, solve, verify_subcontracts
from .pipeline import Flags, PipelineReport, emit_report, run, run_spec
from .reach import ReachConfig, ReachResult, Window, mc_envelope, reach
from .specfile import ProblemSpec, SpecError, bundled, load, loads

__version__ = "0.1.0"

__all__ = [
    "EMPTY",
    "Block",
    "Contracted",
    "DesignSolution",
    "Flags",
    "FunctionalContract",
    "Infeasible",
    "Interval",
    "IntervalBox",
    "LowerBoundViolation",
    "OutputSpec",
    "PipelineReport",
    "PrimaryVerdictKind",
    "ProblemSpec",
    "ReachConfig",
    "ReachResult",
    "RealizableSets",
    "RelationalContract",
    "SpecError",
    "SubcontractSet",
    "Variable",
    "Window",
    "build_csp",
    "build_problem",
    "bundled",
    "check_composability",
    "check_primary_refinement",
    "check_realizability",
    "check_refinement",
    "check_satisfiability",
    "classify",
    "classify_system_level",
    "emit_report",
    "incidence",
    "load",
    "loads",
    "make_block",
    "mc_envelope",
    "parse",
    "propagate",
    "reach",
    "run",
    "run_spec",
    "solve",
    "validate",
    "verify_subcontracts",
]
