"""Deterministic single-threaded execution backend.

Message sends enqueue directly into the receiver's mailbox at send time
(the semantics of a single-node actor runtime): delivery is FIFO per
mailbox, which subsumes per-sender FIFO and preserves causal order - the
merge protocol's buffered-flush handoff depends on both.

Two driving disciplines:

* lockstep (default): each offered event is processed to quiescence before
  the next; deliveries drain in global FIFO order.  Counters are exact and
  independent of any seed.
* pipelined: events pile into the root's mailbox as offered and a seeded
  scheduler picks which process handles its next message, interleaving
  arbitrarily across processes.  This is the discipline that actually
  exercises merge buffering.
"""

from __future__ import annotations

import random
from collections import deque

from .messages import END_OF_TRACE, Ev
from .network import MonitorNetwork, SchedulerConfig
from .transitions import HubState, ProtocolViolation


class SimBackend:
    def __init__(self, plan, config: SchedulerConfig):
        self.config = config
        self.lockstep = config.lockstep
        self.mailboxes: dict = {}
        self.fifo: deque = deque()
        self.pending: deque = deque()  # offered but not yet injected (pipelined)
        self.rng = random.Random(config.seed)
        self.net = MonitorNetwork(plan, config)
        if not self.lockstep:
            for pid in self.net.procs:
                self.mailboxes[pid] = deque()
            self.net.on_spawn = self._on_spawn
        self.net.metrics.sample_boundary()

    def _on_spawn(self, proc):
        self.mailboxes[proc.pid] = deque()

    # -- delivery --------------------------------------------------------------

    def _post(self, dst, sender, msg):
        if self.lockstep:
            self.fifo.append((dst, sender, msg))
        else:
            mb = self.mailboxes.get(dst)
            if mb is not None:
                mb.append((sender, msg))

    def _drain_fifo(self):
        q = self.fifo
        procs = self.net.procs
        m = self.net.metrics
        handle = self.net.handle
        while q:
            dst, sender, msg = q.popleft()
            proc = procs[dst]
            if not proc.alive:
                target = self.net.redirect(dst, msg)
                if target != dst:
                    q.append((target, sender, msg))
                continue
            state = proc.state
            # fast path for the dominant delivery: a normal-phase hub
            # replicating an event to its children (kept in lockstep with
            # hub_transition; see the equivalence test in the suite)
            if type(state) is HubState and state.awaiting is None and type(msg) is Ev:
                last = proc.last_ev
                if last is None:
                    proc.first_ev = msg.index
                elif msg.index != last + 1:
                    raise ProtocolViolation(
                        state, msg, f"event {msg.index} after {last}: trace lost or reordered"
                    )
                proc.last_ev = msg.index
                children = state.children
                m.forwards += len(children)
                for child in children:
                    if procs[child].alive:
                        q.append((child, dst, msg))
                continue
            for envelope in handle(dst, sender, msg):
                q.append(envelope)

    def _drain_random(self):
        # Trace events arrive over time: injecting the next offered event
        # into the root's mailbox competes with ordinary deliveries, so
        # events genuinely land in the middle of merges.
        boxes = self.mailboxes
        procs = self.net.procs
        net = self.net
        handle = net.handle
        rng = self.rng
        while True:
            ready = sorted(pid for pid, mb in boxes.items() if mb)
            n = len(ready) + (1 if self.pending else 0)
            if n == 0:
                return
            k = rng.randrange(n) if n > 1 else 0
            if k == len(ready):
                event = self.pending.popleft()
                root = net.root
                if root is not None and procs[root].alive and not net.violations:
                    boxes[root].append((None, Ev(event.index, event)))
                continue
            pid = ready[k]
            proc = procs[pid]
            if not proc.alive:
                for sender, msg in boxes[pid]:
                    target = net.redirect(pid, msg)
                    if target != pid:
                        boxes[target].append((sender, msg))
                boxes[pid].clear()
                continue
            sender, msg = boxes[pid].popleft()
            for dst, snd, m in handle(pid, sender, msg):
                dst = net.redirect(dst, m)
                mb = boxes.get(dst)
                if mb is not None:
                    mb.append((snd, m))

    def _drain(self):
        if self.lockstep:
            self._drain_fifo()
        else:
            self._drain_random()

    # -- driving ----------------------------------------------------------------

    def offer(self, event):
        net = self.net
        net.last_event_index = event.index
        net.metrics.events += 1
        if not self.lockstep:
            self.pending.append(event)
            return
        root = net.root
        if root is None or not net.procs[root].alive or net.violations:
            return  # verdict already determined or nothing to monitor
        before = net.metrics.forwards
        self.fifo.append((root, None, Ev(event.index, event)))
        self._drain_fifo()
        net.metrics.forwards_per_event.append(net.metrics.forwards - before)
        net.metrics.sample_boundary()
        if self.config.check_invariants:
            net.assert_quiescent_shape()

    def topology(self):
        return self.net.topology()

    def finish(self):
        net = self.net
        if not self.lockstep:
            self._drain_random()
            net.metrics.sample_boundary()
        net.assert_quiescent_shape()
        topology = net.topology()
        root = net.root
        if root is not None and net.procs[root].alive:
            self._post(root, None, END_OF_TRACE)
            self._drain()
        # after shutdown nothing may be mid-merge and no mailbox nonempty
        net.assert_quiescent_shape()
        return topology
