"""Synthetic predecessor-server workloads.

The server under scrutiny receives requests ``srv ? {n, clientK}`` and
answers ``clientK ! n-1`` when ``n > 0``, or reports the offending client
with ``err ! clientK`` when ``n = 0``.  Request/response pairs stay
adjacent in the global trace (the property watches one round at a time);
which client owns the next round is chosen seeded-randomly.

``error_rate`` is the probability that a round's response is corrupted:
either an off-by-one reply (``clientK ! n`` instead of ``n-1``), an
unwarranted error report for a non-zero request, or an error report naming
the wrong client.  Every corruption violates the predecessor property at
the response event.  With ``error_rate=0`` the trace is violation-free.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .events import Atom, Event, Int, Tup


@dataclass(frozen=True)
class WorkloadSpec:
    clients: int = 1
    requests_per_client: int = 1
    error_rate: float = 0.0
    end_event: bool = False
    seed: int = 0

    def rounds(self) -> int:
        return self.clients * self.requests_per_client


def gen_workload(spec: WorkloadSpec) -> list:
    """Deterministic event list for a spec; identical spec gives an
    identical trace, byte for byte once rendered."""
    rng = random.Random(spec.seed)
    owners = [k for k in range(1, spec.clients + 1) for _ in range(spec.requests_per_client)]
    rng.shuffle(owners)

    srv = Atom("srv")
    err = Atom("err")
    events: list = []
    index = 1

    def emit(direction, target, payload):
        nonlocal index
        events.append(Event(direction, target, payload, index))
        index += 1

    for owner in owners:
        client = Atom(f"c{owner}")
        n = rng.randint(0, 8)
        emit("?", srv, Tup((Int(n), client)))
        corrupt = spec.error_rate > 0 and rng.random() < spec.error_rate
        if n > 0:
            if not corrupt:
                emit("!", client, Int(n - 1))
            elif rng.random() < 0.5:
                emit("!", client, Int(n))  # off-by-one reply
            else:
                emit("!", err, client)  # unwarranted error report
        else:
            if not corrupt:
                emit("!", err, client)
            else:
                wrong = Atom(f"c{owner % spec.clients + 1}") if spec.clients > 1 \
                    else Atom(f"c{spec.clients + 1}")
                emit("!", err, wrong)  # error report naming the wrong client
    if spec.end_event:
        emit("!", Atom("end"), Atom("done"))
    return events


def render_trace(events) -> str:
    """Trace-file text for an event list (one event per line)."""
    return "".join(f"{e}\n" for e in events)
