import pytest

from shmlmon.bench import BenchMismatch, run_bench
from shmlmon.events import EvalTypeError
from shmlmon.oracle import violation
from shmlmon.parser import parse_trace
from shmlmon.runtime import SchedulerConfig, deploy, run_trace
from shmlmon.synthesis import Mode, synthesize

from conftest import wf


ILL_TYPED = "[a ? x] if x + 1 == 2 then ff else tt"


def test_sim_backend_surfaces_typed_fault_with_event_index():
    plan = synthesize(wf(ILL_TYPED), Mode.MULTI)
    with pytest.raises(EvalTypeError) as err:
        run_trace(plan, parse_trace("a ? b"), SchedulerConfig())
    assert err.value.event_index == 1


def test_threads_backend_surfaces_typed_fault():
    plan = synthesize(wf(ILL_TYPED), Mode.MULTI)
    with pytest.raises(EvalTypeError):
        run_trace(plan, parse_trace("a ? b"), SchedulerConfig(backend="threads"))


def test_deploy_rejects_mode_mismatch():
    plan = synthesize(wf("[a ? x] ff"), Mode.MULTI)
    with pytest.raises(ValueError):
        deploy(plan, Mode.BASELINE, SchedulerConfig())


def test_unknown_backend_rejected():
    plan = synthesize(wf("[a ? x] ff"), Mode.MULTI)
    with pytest.raises(ValueError):
        deploy(plan, Mode.MULTI, SchedulerConfig(backend="carrier-pigeon"))


def test_bench_aborts_on_verdict_mismatch(monkeypatch, predecessor, good_trace):
    # a disagreement between a runtime mode and the oracle is a correctness
    # failure and must abort the report rather than be averaged away
    import shmlmon.bench as bench_module

    monkeypatch.setattr(bench_module, "oracle_verdict",
                        lambda *a, **k: violation(1))
    with pytest.raises(BenchMismatch):
        run_bench(predecessor, good_trace)
