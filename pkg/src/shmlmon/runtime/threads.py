"""Real-thread execution backend.

Every combinator runs a dedicated thread blocking on its own queue; sends
enqueue at send time, so delivery is FIFO per mailbox exactly as in the
simulated backend.  Handler bodies are serialized under one lock (they
mutate the shared process table and metrics, and the interpreter lock
would serialize them anyway); the measured latency still reflects real
queue handoffs between threads, which is what the benchmark compares.

Quiescence is detected with an in-flight message counter: it is
incremented before every enqueue and decremented after the message's
handler (including enqueuing everything the handler produced), so it can
only read zero when no message is queued or being processed anywhere.
"""

from __future__ import annotations

import threading
import time
from queue import Empty, SimpleQueue

from .messages import END_OF_TRACE, Ev
from .network import MonitoringFault, MonitorNetwork, SchedulerConfig

_POISON = object()


class ThreadBackend:
    def __init__(self, plan, config: SchedulerConfig):
        self.config = config
        self.lockstep = config.lockstep
        self.lock = threading.Lock()
        self.quiet = threading.Condition(self.lock)
        self.inflight = 0
        self.queues: dict = {}
        self.threads: dict = {}
        self.fault: list = []
        self._old_stack = threading.stack_size(512 * 1024)
        self.net = MonitorNetwork(plan, config)
        self.net.on_spawn = self._on_spawn
        for pid in list(self.net.procs):
            self._on_spawn(self.net.procs[pid])
        self.net.metrics.sample_boundary()

    def _on_spawn(self, proc):
        if proc.pid in self.queues:
            return
        q: SimpleQueue = SimpleQueue()
        self.queues[proc.pid] = q
        t = threading.Thread(target=self._loop, args=(proc.pid, q), daemon=True)
        self.threads[proc.pid] = t
        t.start()

    def _send(self, dst, sender, msg):
        # caller holds self.lock
        dst = self.net.redirect(dst, msg)
        proc = self.net.procs.get(dst)
        if proc is None or not proc.alive:
            return
        self.inflight += 1
        self.queues[dst].put((sender, msg))

    def _loop(self, pid, q):
        net = self.net
        while True:
            item = q.get()
            if item is _POISON:
                return
            sender, msg = item
            try:
                with self.lock:
                    for dst, snd, out in net.handle(pid, sender, msg):
                        self._send(dst, snd, out)
                    if not net.procs[pid].alive:
                        # drain whatever was queued before this process died;
                        # control traffic from former children follows the
                        # merge handover, the rest drops
                        drained = 0
                        while True:
                            try:
                                leftover = q.get_nowait()
                            except Empty:
                                break
                            if leftover is not _POISON:
                                drained += 1
                                self._send(pid, leftover[0], leftover[1])
                        self.inflight -= 1 + drained
                        if self.inflight == 0:
                            self.quiet.notify_all()
                        return
                    self.inflight -= 1
                    if self.inflight == 0:
                        self.quiet.notify_all()
            except Exception as err:  # protocol violation or monitoring fault
                with self.lock:
                    self.fault.append(err)
                    self.inflight = 0
                    self.quiet.notify_all()
                return

    def _wait_quiescent(self):
        deadline = time.monotonic() + self.config.timeout_ms / 1000.0
        with self.quiet:
            while self.inflight > 0 and not self.fault:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    raise MonitoringFault(
                        f"deadlock: {self.inflight} messages still in flight after "
                        f"{self.config.timeout_ms} ms"
                    )
                self.quiet.wait(min(remaining, 0.5))
        if self.fault:
            raise self.fault[0]

    # -- driving ----------------------------------------------------------------

    def offer(self, event):
        net = self.net
        net.last_event_index = event.index
        net.metrics.events += 1
        root = net.root
        with self.lock:
            discard = root is None or not net.procs[root].alive or bool(net.violations)
            before = net.metrics.forwards
            if not discard:
                started = time.perf_counter_ns()
                self._send(root, None, Ev(event.index, event))
        if discard:
            return
        if self.lockstep:
            self._wait_quiescent()
            elapsed = time.perf_counter_ns() - started
            with self.lock:
                net.metrics.forwards_per_event.append(net.metrics.forwards - before)
                net.metrics.sample_boundary()
                if self.config.record_latency:
                    net.metrics.per_event_latency.append(elapsed)
            if self.config.check_invariants:
                net.assert_quiescent_shape()

    def settle(self):
        self._wait_quiescent()
        with self.lock:
            self.net.metrics.sample_boundary()

    def topology(self):
        with self.lock:
            return self.net.topology()

    def finish(self):
        net = self.net
        self._wait_quiescent()
        with self.lock:
            net.metrics.sample_boundary()
        net.assert_quiescent_shape()
        topology = net.topology()
        root = net.root
        if root is not None and net.procs[root].alive:
            with self.lock:
                self._send(root, None, END_OF_TRACE)
            self._wait_quiescent()
        net.assert_quiescent_shape()
        # shut down whatever is still alive (static baseline hubs); poisoning
        # an already-exited loop's queue is harmless
        with self.lock:
            for q in self.queues.values():
                q.put(_POISON)
        for t in self.threads.values():
            t.join(timeout=5.0)
        threading.stack_size(self._old_stack)
        return topology
