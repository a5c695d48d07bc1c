"""Runtime verification of safety formulas via concurrent monitor combinators.

The pipeline: parse a formula (:mod:`shmlmon.parser`), validate and rename
it (:mod:`shmlmon.formula`), compile it for a synthesis mode
(:mod:`shmlmon.synthesis`), and run it over a trace either sequentially
(:mod:`shmlmon.oracle`) or as a network of communicating combinator
processes (:mod:`shmlmon.runtime`).  :mod:`shmlmon.bench` compares the
modes' overheads on generated workloads (:mod:`shmlmon.workload`).
"""

from .events import Event, EvalTypeError, eval_bool, match
from .formula import (
    WellFormedFormula,
    WellFormednessError,
    apply_subst,
    check_wellformed,
    flatten_conjunctions,
    pretty,
    unfold_max,
)
from .oracle import NO_VIOLATION, Verdict, oracle_verdict, violation
from .parser import ParseError, parse_formula, parse_trace
from .runtime import NetworkHandle, RunResult, SchedulerConfig, deploy, run_trace
from .synthesis import Mode, MonitorPlan, plan_stats, render_plan, synthesize
from .workload import WorkloadSpec, gen_workload, render_trace

__all__ = [
    "Event",
    "EvalTypeError",
    "eval_bool",
    "match",
    "WellFormedFormula",
    "WellFormednessError",
    "apply_subst",
    "check_wellformed",
    "flatten_conjunctions",
    "pretty",
    "unfold_max",
    "NO_VIOLATION",
    "Verdict",
    "oracle_verdict",
    "violation",
    "ParseError",
    "parse_formula",
    "parse_trace",
    "NetworkHandle",
    "RunResult",
    "SchedulerConfig",
    "deploy",
    "run_trace",
    "Mode",
    "MonitorPlan",
    "plan_stats",
    "render_plan",
    "synthesize",
    "WorkloadSpec",
    "gen_workload",
    "render_trace",
]
