"""Benchmark orchestration across synthesis modes.

Runs the same event sequence through each requested mode, cross-checks
every runtime verdict against the sequential oracle (a mismatch aborts the
report: that is a correctness failure, not a benchmark result), and emits
a single JSON-ready report.  Message/process counters are deterministic
under the lockstep driver and reported exactly; wall-clock time is noisy
and averaged over repetitions on the threads backend.
"""

from __future__ import annotations

import hashlib
import json
import time

from .formula import WellFormedFormula, pretty
from .oracle import oracle_verdict
from .runtime import SchedulerConfig, deploy
from .synthesis import Mode, synthesize
from .workload import WorkloadSpec, gen_workload


class BenchMismatch(Exception):
    """A runtime verdict disagreed with the oracle or another mode."""


def formula_hash(wf: WellFormedFormula) -> str:
    return hashlib.sha256(pretty(wf.formula).encode()).hexdigest()[:16]


def _run_once(plan, events, config: SchedulerConfig):
    handle = deploy(plan, plan.mode, config)
    started = time.perf_counter_ns()
    for event in events:
        handle.offer_event(event)
    result = handle.finish()
    elapsed = time.perf_counter_ns() - started
    return result, elapsed


def run_bench(
    wf: WellFormedFormula,
    events: list,
    modes=(Mode.BASELINE, Mode.MULTI, Mode.RECONF),
    backend: str = "sim",
    repetitions: int = 1,
    seed: int = 0,
    timeout_ms: int = 10_000,
    workload: dict = None,
) -> dict:
    expected = oracle_verdict(wf, events)
    report: dict = {
        "formula_hash": formula_hash(wf),
        "workload": workload or {"events": len(events)},
        "backend": backend,
        "seed": seed,
        "modes": {},
    }
    for mode in modes:
        plan = synthesize(wf, mode)
        config = SchedulerConfig(
            backend=backend, seed=seed, lockstep=True, timeout_ms=timeout_ms
        )
        walls = []
        result = None
        for _ in range(max(1, repetitions)):
            run, elapsed = _run_once(plan, events, config)
            if run.verdict != expected:
                raise BenchMismatch(
                    f"{mode} verdict {run.verdict} disagrees with oracle {expected}"
                )
            if result is not None:
                for field in ("forwards", "spawned", "peak_live", "merges_completed"):
                    if getattr(run.metrics, field) != getattr(result.metrics, field):
                        raise BenchMismatch(
                            f"{mode} counter {field} varied across repetitions"
                        )
            result = run
            walls.append(elapsed)
        m = result.metrics
        entry = {
            "events": m.events,
            "forwards": m.forwards,
            "spawned": m.spawned,
            "peak_live": m.peak_live,
            "merges_completed": m.merges_completed,
            "max_depth_seen": m.max_depth_seen,
            "verdict": "violation" if result.verdict.is_violation else "no_violation",
        }
        if result.verdict.is_violation:
            entry["violation_index"] = result.verdict.violation_index
        if backend == "threads":
            entry["wall_ns"] = sum(walls) // len(walls)
        report["modes"][mode.value] = entry
    return report


def bench_report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)


def workload_events(spec: WorkloadSpec):
    return gen_workload(spec), {
        "clients": spec.clients,
        "requests_per_client": spec.requests_per_client,
        "error_rate": spec.error_rate,
        "end_event": spec.end_event,
        "seed": spec.seed,
    }
