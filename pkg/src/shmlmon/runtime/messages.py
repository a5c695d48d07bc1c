"""Messages exchanged between monitor combinators.

Trace events travel as :class:`Ev`; :class:`EndOfTrace` is the shutdown
signal injected after the last event.  The remaining kinds implement
termination pruning and the merge handshake.  ``MergeRequest`` and
``Terminated`` carry their originating process explicitly because a
merging child re-forwards them to its parent on its way out; for every
other message the delivery envelope's sender is authoritative.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..events import Event


@dataclass(frozen=True)
class Ev:
    index: int
    event: Event


@dataclass(frozen=True)
class EndOfTrace:
    pass


@dataclass(frozen=True)
class MergeRequest:
    sender: int


@dataclass(frozen=True)
class MergeAck:
    pass


@dataclass(frozen=True)
class MergeMsg:
    children: tuple


@dataclass(frozen=True)
class MergeFinal:
    pass


@dataclass(frozen=True)
class MergeComplete:
    pass


@dataclass(frozen=True)
class Terminated:
    sender: int


@dataclass(frozen=True)
class ViolationReport:
    index: int


END_OF_TRACE = EndOfTrace()
MERGE_ACK = MergeAck()
MERGE_FINAL = MergeFinal()
MERGE_COMPLETE = MergeComplete()
