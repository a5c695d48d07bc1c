"""Deploy a monitor plan and drive it with trace events.

Usage::

    handle = deploy(plan, plan.mode, SchedulerConfig(backend="sim"))
    for event in trace:
        handle.offer_event(event)
    result = handle.finish()   # verdict + metrics + final topology

``finish`` waits for quiescence after the last event, snapshots the live
topology, then injects the end-of-trace shutdown signal and aggregates the
verdict: a violation with the smallest reported event index if any leaf
reported one, otherwise "no violation".
"""

from __future__ import annotations

from dataclasses import dataclass

from ..oracle import Verdict
from ..synthesis import Mode, MonitorPlan
from .network import Metrics, SchedulerConfig
from .sim import SimBackend
from .threads import ThreadBackend


@dataclass
class RunResult:
    verdict: Verdict
    metrics: Metrics
    topology: object  # plan-node snapshot at post-trace quiescence, or None
    process_ranges: dict


class NetworkHandle:
    def __init__(self, backend):
        self._backend = backend
        self._last_index = 0
        self._finished = False
        self._eot = False

    def offer_event(self, event):
        if self._eot or self._finished:
            raise ValueError("events cannot be offered after end of trace")
        if event.index != self._last_index + 1:
            raise ValueError(
                f"event index {event.index} out of order (expected {self._last_index + 1})"
            )
        self._last_index = event.index
        self._backend.offer(event)

    def topology(self):
        """Live-topology snapshot; only meaningful at a quiescent point."""
        return self._backend.topology()

    def finish(self) -> RunResult:
        if self._finished:
            raise ValueError("finish may only be called once")
        self._eot = True
        self._finished = True
        topology = self._backend.finish()
        net = self._backend.net
        return RunResult(
            verdict=net.verdict(),
            metrics=net.metrics,
            topology=topology,
            process_ranges=net.process_ranges(),
        )


def deploy(plan: MonitorPlan, mode: Mode = None, scheduler: SchedulerConfig = None) -> NetworkHandle:
    if mode is not None and mode is not plan.mode:
        raise ValueError(f"plan was synthesized for {plan.mode}, not {mode}")
    config = scheduler or SchedulerConfig()
    if config.backend == "sim":
        backend = SimBackend(plan, config)
    elif config.backend == "threads":
        backend = ThreadBackend(plan, config)
    else:
        raise ValueError(f"unknown backend {config.backend!r}")
    return NetworkHandle(backend)


def run_trace(plan: MonitorPlan, trace, scheduler: SchedulerConfig = None) -> RunResult:
    """Deploy, offer the whole trace, and finish."""
    handle = deploy(plan, plan.mode, scheduler)
    for event in trace:
        handle.offer_event(event)
    return handle.finish()
