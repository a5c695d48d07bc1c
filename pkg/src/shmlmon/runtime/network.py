"""Backend-agnostic monitor-network bookkeeping.

Owns the process table, metrics, and the verdict sink, and interprets the
effects produced by the pure transition functions: message sends, process
halts, and leaf-to-hub becoming (which spawns children).  Backends own the
mailboxes and the scheduling; they feed deliveries through
:meth:`MonitorNetwork.handle` and enqueue whatever it returns.

Instrumentation kept here:

* ``forwards`` counts every trace-event send between combinators,
  including sends to already-terminated children (which are dropped on
  delivery) - the cost a static child list actually incurs.
* Every process records the first/last trace index it received; a gap or
  regression raises :class:`ProtocolViolation` on the spot, which is the
  online no-loss/no-reorder certificate.
* Events buffered by a hub during a merge are counted in and counted back
  out when flushed, so dropped buffers cannot go unnoticed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from ..oracle import NO_VIOLATION, Verdict, violation
from ..synthesis import (
    FalsityPlan,
    Hub,
    Mode,
    MonitorPlan,
    NecNode,
    RHub,
    RLeaf,
    TruthPlan,
)
from .messages import (
    EndOfTrace,
    Ev,
    MergeComplete,
    MergeMsg,
    MergeRequest,
    Terminated,
)
from .transitions import (
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


@dataclass
class SchedulerConfig:
    """How a deployed network is driven.

    ``lockstep`` processes each offered event to quiescence before the next
    one is accepted, which makes every counter schedule-independent (the
    benchmark mode).  With ``lockstep=False`` events are injected freely
    and the (seeded) scheduler interleaves deliveries arbitrarily, which is
    what puts real pressure on the merge protocol's buffering.
    """

    backend: str = "sim"  # "sim" | "threads"
    seed: int = 0
    lockstep: bool = True
    timeout_ms: int = 10_000
    record_latency: bool = False
    check_invariants: bool = False  # walk the topology at every quiescent point


@dataclass
class Metrics:
    events: int = 0
    forwards: int = 0
    spawned: int = 0
    peak_live: int = 0
    merges_completed: int = 0
    max_depth_seen: int = 0
    per_event_latency: list = field(default_factory=list)  # ns, threads backend
    # supporting instrumentation (not part of the benchmark report)
    live: int = 0
    live_leaves: int = 0
    max_live_leaves: int = 0
    buffered_in: int = 0
    buffered_out: int = 0
    forwards_per_event: list = field(default_factory=list)  # lockstep only

    def sample_boundary(self):
        if self.live > self.peak_live:
            self.peak_live = self.live
        if self.live_leaves > self.max_live_leaves:
            self.max_live_leaves = self.live_leaves


class Process:
    __slots__ = ("pid", "state", "alive", "depth", "is_leaf", "first_ev",
                 "last_ev", "forward_to")

    def __init__(self, pid, state, depth, is_leaf):
        self.pid = pid
        self.state = state
        self.alive = True
        self.depth = depth
        self.is_leaf = is_leaf
        self.first_ev: Optional[int] = None
        self.last_ev: Optional[int] = None
        # A child that dies by merging hands its mailbox role to its parent:
        # children may still react to events it forwarded before dying, and
        # those terminations/merge-requests must reach whoever adopted them.
        self.forward_to: Optional[int] = None


class MonitoringFault(Exception):
    """The network cannot produce a verdict (protocol bug or deadlock)."""


class MonitorNetwork:
    def __init__(self, plan: MonitorPlan, config: SchedulerConfig):
        self.mode: Mode = plan.mode
        self.config = config
        self.metrics = Metrics()
        self.procs: dict = {}
        self.next_pid = 1
        self.violations: list = []
        self.last_event_index = 0
        self.on_spawn: Optional[Callable] = None  # backend hook
        self.root: Optional[int] = None
        root_node = plan.root
        if isinstance(root_node, TruthPlan):
            pass  # nothing to monitor; verdict is immediately inconclusive
        elif isinstance(root_node, FalsityPlan):
            self.violations.append(0)
        else:
            self.root = self._instantiate(root_node, None, 1)

    # -- process construction ------------------------------------------------

    def _instantiate(self, node, parent: Optional[int], depth: int) -> int:
        pid = self.next_pid
        self.next_pid += 1
        if isinstance(node, (NecNode, RLeaf)):
            state = LeafState(node.action, node.body, dict(node.env), parent)
            is_leaf = True
        elif isinstance(node, (Hub, RHub)):
            # reserve the pid first so children point at their parent
            kids = []
            state = None
            is_leaf = False
        else:
            raise TypeError(f"cannot instantiate {node!r}")
        proc = Process(pid, state, depth, is_leaf)
        self.procs[pid] = proc
        m = self.metrics
        m.spawned += 1
        m.live += 1
        if is_leaf:
            m.live_leaves += 1
        if depth > m.max_depth_seen:
            m.max_depth_seen = depth
        if not self.config.lockstep:
            m.sample_boundary()
        if not is_leaf:
            kids = [self._instantiate(c, pid, depth + 1) for c in node.children]
            proc.state = HubState(tuple(kids), parent)
        if self.on_spawn is not None:
            self.on_spawn(proc)
        return pid

    # -- delivery -------------------------------------------------------------

    def redirect(self, dst: int, msg) -> int:
        """Route control traffic addressed to a merged-away child to the
        hub that absorbed it (transitively).  Everything else still drops
        when the destination is gone."""
        kind = type(msg)
        if kind is not Terminated and kind is not MergeRequest:
            return dst
        proc = self.procs.get(dst)
        while proc is not None and not proc.alive and proc.forward_to is not None:
            dst = proc.forward_to
            proc = self.procs.get(dst)
        return dst

    def handle(self, pid: int, sender: Optional[int], msg) -> list:
        """Deliver one message; returns the resulting (dst, sender, msg)
        envelopes for the backend to enqueue."""
        proc = self.procs[pid]
        if not proc.alive:
            return []
        state = proc.state
        kind = type(msg)
        m = self.metrics

        if kind is Ev:
            last = proc.last_ev
            if last is None:
                proc.first_ev = msg.index
            elif msg.index != last + 1:
                raise ProtocolViolation(
                    state, msg, f"event {msg.index} after {last}: trace lost or reordered"
                )
            proc.last_ev = msg.index
        elif kind is EndOfTrace:
            # no-loss tail check: while the verdict is open, every live
            # process must have seen the whole trace since its activation
            # (after a violation the remaining events are discarded on
            # purpose, so the check no longer applies)
            if (
                not self.violations
                and proc.last_ev is not None
                and proc.last_ev != self.last_event_index
            ):
                raise ProtocolViolation(
                    state, msg,
                    f"process saw events up to {proc.last_ev} of {self.last_event_index}",
                )

        stype = type(state)
        if stype is HubState:
            if state.awaiting is not None and (kind is Ev or kind is EndOfTrace):
                m.buffered_in += 1
            flushing = kind is MergeComplete and state.event_buffer
            reaction = hub_transition(pid, state, sender, msg, self.mode)
            if kind is MergeComplete:
                m.merges_completed += 1
                if flushing:
                    m.buffered_out += len(state.event_buffer)
            if kind is MergeMsg:
                self._adopt(tuple(msg.children), proc.depth + 1)
        elif stype is LeafState:
            reaction = leaf_transition(pid, state, sender, msg, self.mode)
        elif stype is MergingChildState:
            reaction = merging_child_transition(pid, state, sender, msg, self.mode)
        else:
            raise MonitoringFault(f"process {pid} has no state")

        return self._apply(proc, reaction)

    def _adopt(self, kids: tuple, depth: int):
        # adopted subtrees sit one level below their new parent; future
        # spawns underneath them derive from the stored depth
        for kid in kids:
            proc = self.procs[kid]
            delta = depth - proc.depth
            if delta:
                self._shift_depth(proc, delta)

    def _shift_depth(self, proc: Process, delta: int):
        proc.depth += delta
        if proc.depth > self.metrics.max_depth_seen:
            self.metrics.max_depth_seen = proc.depth
        state = proc.state
        if isinstance(state, (HubState, MergingChildState)):
            for kid in state.children:
                self._shift_depth(self.procs[kid], delta)

    def _apply(self, proc: Process, reaction: Reaction) -> list:
        m = self.metrics
        pid = proc.pid
        if reaction.become is not None:
            become = reaction.become
            kids = tuple(
                self._instantiate(child, pid, proc.depth + 1) for child in become.children
            )
            if become.request_merge:
                proc.state = MergingChildState(kids, become.parent)
            else:
                proc.state = HubState(kids, become.parent)
            proc.is_leaf = False
            m.live_leaves -= 1
        elif reaction.state is HALT:
            if isinstance(proc.state, MergingChildState):
                proc.forward_to = proc.state.parent
            proc.alive = False
            m.live -= 1
            if proc.is_leaf:
                m.live_leaves -= 1
        else:
            proc.state = reaction.state

        out = []
        for dst, msg in reaction.sends:
            if type(msg) is Ev:
                m.forwards += 1
            if dst == SINK:
                self.violations.append(msg.index)
                continue
            out.append((dst, pid, msg))
        return out

    # -- inspection -----------------------------------------------------------

    def verdict(self) -> Verdict:
        if self.violations:
            return violation(min(self.violations))
        return NO_VIOLATION

    def topology(self):
        """Snapshot the live process tree as plan nodes (None if the root
        has terminated).  Iterative: chains grow deeper than the
        interpreter's recursion limit."""
        if self.root is None or not self.procs[self.root].alive:
            return None
        built: dict = {}
        stack = [(self.root, False)]
        while stack:
            pid, expanded = stack.pop()
            state = self.procs[pid].state
            if isinstance(state, LeafState):
                built[pid] = NecNode(state.action, state.body, dict(state.env))
                continue
            kids = [c for c in state.children if self.procs[c].alive]
            if expanded:
                built[pid] = Hub([built[c] for c in kids])
            else:
                stack.append((pid, True))
                stack.extend((c, False) for c in kids)
        return built[self.root]

    def assert_quiescent_shape(self):
        """At a quiescent point no merge may be underway; in reconf mode the
        topology must be a spider (no hub has a hub child)."""
        for proc in self.procs.values():
            if not proc.alive:
                continue
            state = proc.state
            if isinstance(state, MergingChildState):
                raise MonitoringFault(f"process {proc.pid} stuck mid-merge ({state.phase})")
            if isinstance(state, HubState) and state.awaiting is not None:
                raise MonitoringFault(f"hub {proc.pid} still awaiting a merge-msg")
        if self.metrics.buffered_in != self.metrics.buffered_out:
            raise MonitoringFault(
                f"buffered events lost: {self.metrics.buffered_in} in, "
                f"{self.metrics.buffered_out} out"
            )
        if self.mode is Mode.RECONF and self.config.check_invariants:
            for proc in self.procs.values():
                if proc.alive and isinstance(proc.state, HubState):
                    for kid in proc.state.children:
                        k = self.procs[kid]
                        if k.alive and isinstance(k.state, HubState):
                            raise MonitoringFault(
                                f"hub {kid} is a child of hub {proc.pid}: not a spider"
                            )

    def process_ranges(self) -> dict:
        """Per-process received-event ranges, for the no-loss test suite."""
        return {
            pid: (proc.first_ev, proc.last_ev, proc.is_leaf)
            for pid, proc in self.procs.items()
        }
