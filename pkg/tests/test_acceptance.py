"""Acceptance criteria, one test per criterion, run at stated tolerances.

Each test prints a single PASS line with the measured numbers (visible
with ``pytest -s``); a failing assertion is the FAIL signal.  Counters are
exact; the only tolerances are the stated wall-clock budgets and the
latency sanity bound of criterion 6.
"""

import random
import statistics
import time

import pytest

from shmlmon.formula import check_wellformed
from shmlmon.oracle import oracle_verdict
from shmlmon.parser import parse_formula
from shmlmon.runtime import SchedulerConfig, deploy, run_trace
from shmlmon.runtime.messages import (
    END_OF_TRACE,
    Ev,
    MERGE_ACK,
    MERGE_COMPLETE,
    MERGE_FINAL,
    MergeMsg,
    MergeRequest,
    Terminated,
    ViolationReport,
)
from shmlmon.runtime.transitions import (
    AWAIT_FINAL,
    HubState,
    MergingChildState,
    ProtocolViolation,
    hub_transition,
    leaf_transition,
    merging_child_transition,
)
from shmlmon.synthesis import Hub, Mode, NecNode, plan_stats, synthesize
from shmlmon.workload import WorkloadSpec, gen_workload

from conftest import PREDECESSOR, GOOD_TRACE, wf
from shmlmon.parser import parse_event_line, parse_trace


def formula1():
    return wf(PREDECESSOR)


def fig_trace():
    return parse_trace(GOOD_TRACE)  # srv?{5,c1} . c1!4 . srv?{3,c2}


def sim(**kw):
    return SchedulerConfig(backend="sim", **kw)


def test_criterion_1_replication_counts():
    """Event 2 costs exactly 4 replications in baseline, 3 in multi/reconf."""
    started = time.monotonic()
    formula = formula1()
    trace = fig_trace()
    per_mode = {}
    for mode in Mode:
        result = run_trace(synthesize(formula, mode), trace, sim())
        per_mode[mode] = result.metrics.forwards_per_event[1]  # event 2
    assert per_mode[Mode.BASELINE] == 4
    assert per_mode[Mode.MULTI] == 3
    assert per_mode[Mode.RECONF] == 3
    elapsed = time.monotonic() - started
    assert elapsed < 1.0
    print(f"criterion 1: PASS - event-2 replications baseline=4 multi=3 reconf=3 "
          f"({elapsed:.2f}s < 1s)")


def test_criterion_2_topology_counts():
    """Topologies after event 1 and the final reconf spider."""
    formula = formula1()
    trace = fig_trace()
    after_one = {}
    for mode in Mode:
        handle = deploy(synthesize(formula, mode), mode, sim())
        handle.offer_event(trace[0])
        after_one[mode] = plan_stats(handle.topology())
        for event in trace[1:]:
            handle.offer_event(event)
        if mode is Mode.RECONF:
            final = handle.finish()
    assert after_one[Mode.BASELINE] == {"hubs": 2, "leaves": 3, "depth": 3}
    assert after_one[Mode.MULTI] == {"hubs": 1, "leaves": 3, "depth": 2}
    assert after_one[Mode.RECONF] == {"hubs": 1, "leaves": 3, "depth": 2}
    spider = final.topology
    assert isinstance(spider, Hub)
    assert all(isinstance(child, NecNode) for child in spider.children)
    assert plan_stats(spider) == {"hubs": 1, "leaves": 3, "depth": 2}
    print("criterion 2: PASS - baseline 2 hubs + 3 leaves, multi/reconf 1 hub + "
          "3 leaves after event 1; reconf quiesces to a spider")


def test_criterion_3_oracle_equivalence():
    """1000 random formulas x traces x 3 modes x 10 scheduler seeds."""
    from genrand import random_formula, random_trace

    started = time.monotonic()
    rng = random.Random(20240817)
    runs = 0
    violations = 0
    for _ in range(1000):
        formula = check_wellformed(random_formula(rng, depth=rng.randint(0, 5)))
        trace = random_trace(rng, 20)
        expected = oracle_verdict(formula, trace)
        violations += expected.is_violation
        for mode in Mode:
            plan = synthesize(formula, mode)
            for seed in range(10):
                got = run_trace(plan, trace, sim(lockstep=False, seed=seed))
                assert got.verdict == expected, (mode, seed, expected, got.verdict)
                runs += 1
    elapsed = time.monotonic() - started
    assert runs == 1000 * 3 * 10
    assert violations > 50  # the sweep exercised real violations
    assert elapsed < 120.0
    print(f"criterion 3: PASS - {runs} runs match the oracle exactly "
          f"({violations} violating cases; {elapsed:.1f}s < 120s)")


def test_criterion_4_no_loss_no_reorder_under_merge_pressure():
    """100 rounds in reconf, 10 seeds: contiguous per-process delivery and
    zero buffered events dropped.

    Gaps or reordering raise a protocol fault at delivery time, so a clean
    finish plus range bookkeeping is the certificate.
    """
    formula = formula1()
    events = gen_workload(WorkloadSpec(clients=4, requests_per_client=25, seed=77))
    assert len(events) == 200
    buffered_total = 0
    for seed in range(10):
        result = run_trace(
            synthesize(formula, Mode.RECONF), events,
            sim(lockstep=False, seed=seed, check_invariants=True),
        )
        assert not result.verdict.is_violation
        metrics = result.metrics
        assert metrics.buffered_in == metrics.buffered_out
        buffered_total += metrics.buffered_in
        assert metrics.merges_completed == 99  # every round after the first merges
        for pid, (first, last, _leaf) in result.process_ranges.items():
            assert (first is None) == (last is None)
            if first is not None:
                assert 1 <= first <= last <= len(events)
    assert buffered_total > 0  # merges actually happened under event pressure
    print(f"criterion 4: PASS - 10 seeds x 200 events, contiguous delivery, "
          f"{buffered_total} buffered events all flushed")


def test_criterion_5_chain_vs_spider_scaling():
    """Baseline grows linearly with rounds and never prunes; reconf stays a
    spider with bounded live processes; forwards ordered at every size."""
    started = time.monotonic()
    formula = formula1()
    report_lines = []
    for n_events in (100, 1000, 10_000):
        rounds = n_events // 2
        events = gen_workload(WorkloadSpec(clients=5, requests_per_client=rounds // 5, seed=13))
        assert len(events) == n_events
        forwards = {}
        for mode in Mode:
            result = run_trace(synthesize(formula, mode), events, sim())
            metrics = result.metrics
            forwards[mode] = metrics.forwards
            if mode is Mode.BASELINE:
                # two hubs come into existence per round and none is removed
                stats = plan_stats(result.topology)
                assert stats["hubs"] >= 2 * rounds
                assert metrics.spawned == 1 + 4 * rounds  # linear in rounds
            if mode is Mode.RECONF:
                assert metrics.peak_live <= 1 + metrics.max_live_leaves
                assert plan_stats(result.topology)["hubs"] == 1
        assert forwards[Mode.RECONF] <= forwards[Mode.MULTI] <= forwards[Mode.BASELINE]
        report_lines.append(
            f"{n_events}ev: fwd reconf={forwards[Mode.RECONF]:,} <= "
            f"multi={forwards[Mode.MULTI]:,} <= baseline={forwards[Mode.BASELINE]:,}"
        )
    elapsed = time.monotonic() - started
    assert elapsed < 60.0
    print(f"criterion 5: PASS - {'; '.join(report_lines)} ({elapsed:.1f}s < 60s)")


def test_criterion_6_threads_smoke_latency():
    """Real-thread backend on the 10^4-event workload: finite wall time and
    mean per-event latency of reconf within 2x multi (sanity bound)."""
    formula = formula1()
    events = gen_workload(WorkloadSpec(clients=10, requests_per_client=500, seed=29))
    assert len(events) == 10_000
    latency = {}
    wall = {}
    for mode in (Mode.MULTI, Mode.RECONF):
        config = SchedulerConfig(backend="threads", record_latency=True,
                                 timeout_ms=60_000)
        started = time.monotonic()
        result = run_trace(synthesize(formula, mode), events, config)
        wall[mode] = time.monotonic() - started
        assert not result.verdict.is_violation
        latency[mode] = statistics.mean(result.metrics.per_event_latency)
    assert wall[Mode.MULTI] > 0 and wall[Mode.RECONF] > 0  # finite, completed
    assert latency[Mode.RECONF] <= 2 * latency[Mode.MULTI]
    print(f"criterion 6: PASS - threads 10^4 events: mean latency "
          f"reconf={latency[Mode.RECONF]/1e3:.0f}us <= 2x "
          f"multi={latency[Mode.MULTI]/1e3:.0f}us "
          f"(wall: multi={wall[Mode.MULTI]:.0f}s reconf={wall[Mode.RECONF]:.0f}s)")


def test_criterion_7_protocol_state_machine_conformance():
    """Every message kind against every hub/merging-child phase either takes
    its protocol step or faults; nothing is dropped silently."""
    started = time.monotonic()

    def event(index):
        return Ev(index, parse_event_line("a ! 1", index))

    messages = [
        event(3),
        END_OF_TRACE,
        MergeRequest(2),
        MERGE_ACK,
        MergeMsg((7,)),
        MERGE_FINAL,
        MERGE_COMPLETE,
        Terminated(2),
        ViolationReport(3),
    ]
    phases = [
        ("hub normal", lambda: HubState(children=(2, 4), parent=None),
         hub_transition, Mode.BASELINE, {"Ev", "EndOfTrace", "Terminated"}),
        ("hub normal", lambda: HubState(children=(2, 4), parent=None),
         hub_transition, Mode.MULTI, {"Ev", "EndOfTrace", "Terminated"}),
        ("hub normal", lambda: HubState(children=(2, 4), parent=None),
         hub_transition, Mode.RECONF,
         {"Ev", "EndOfTrace", "Terminated", "MergeRequest"}),
        ("hub awaiting-merge-msg",
         lambda: HubState(children=(2, 4), parent=None, awaiting=2),
         hub_transition, Mode.RECONF,
         {"Ev", "EndOfTrace", "Terminated", "MergeRequest", "MergeMsg", "MergeComplete"}),
        ("merging child await-ack",
         lambda: MergingChildState(children=(2, 8), parent=1),
         merging_child_transition, Mode.RECONF,
         {"Ev", "EndOfTrace", "MergeAck", "Terminated", "MergeRequest"}),
        ("merging child await-final",
         lambda: MergingChildState(children=(2, 8), parent=1, phase=AWAIT_FINAL),
         merging_child_transition, Mode.RECONF,
         {"MergeFinal", "Terminated", "MergeRequest"}),
    ]
    table = []
    for name, build, transition, mode, legal in phases:
        for msg in messages:
            kind = type(msg).__name__
            if kind in legal:
                reaction = transition(1, build(), 2, msg, mode)
                assert reaction is not None
                table.append((name, mode.value, kind, "step"))
            else:
                with pytest.raises(ProtocolViolation):
                    transition(1, build(), 2, msg, mode)
                table.append((name, mode.value, kind, "fault"))
    elapsed = time.monotonic() - started
    assert len(table) == len(phases) * len(messages)
    assert elapsed < 1.0
    steps = sum(1 for row in table if row[3] == "step")
    print(f"criterion 7: PASS - {len(table)} phase x message combinations: "
          f"{steps} protocol steps, {len(table) - steps} faults, no silent drops "
          f"({elapsed:.2f}s < 1s)")
