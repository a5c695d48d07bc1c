"""Concurrent monitor-combinator runtime."""

from .api import NetworkHandle, RunResult, deploy, run_trace
from .messages import (
    END_OF_TRACE,
    EndOfTrace,
    Ev,
    MergeAck,
    MergeComplete,
    MergeFinal,
    MergeMsg,
    MergeRequest,
    Terminated,
    ViolationReport,
)
from .network import Metrics, MonitoringFault, MonitorNetwork, SchedulerConfig
from .transitions import (
    AWAIT_ACK,
    AWAIT_FINAL,
    BecomeHub,
    HALT,
    HubState,
    LeafState,
    MergingChildState,
    ProtocolViolation,
    Reaction,
    SINK,
    hub_transition,
    leaf_transition,
    merging_child_transition,
)

__all__ = [
    "NetworkHandle",
    "RunResult",
    "deploy",
    "run_trace",
    "Metrics",
    "MonitoringFault",
    "MonitorNetwork",
    "SchedulerConfig",
    "ProtocolViolation",
    "hub_transition",
    "leaf_transition",
    "merging_child_transition",
]
