"""Pure per-combinator state machines.

Each combinator is a sequential reactor over its mailbox.  The functions
here map (state, received message) to a new state plus outbound messages
and never touch shared state, so every protocol step can be unit-tested
deterministically; the network layer interprets the returned effects
(sends, halts, child spawning).

Hub phases
    normal            forward every event to every child; prune terminated
                      children (multi/reconf); service merge requests
                      (reconf) by acknowledging and entering the waiting
                      phase.
    awaiting merge    buffer events, defer other control traffic, splice
                      the announced grandchildren over the merging child on
                      merge-msg, and on merge-complete flush the buffer in
                      order and process the deferred traffic.

Merging child phases (reconf; entered by a leaf that unfolded into a
conjunction-rooted subsystem under a parent hub)
    await_ack         still a functioning hub: events keep flowing to its
                      children while the merge request is in flight.
    await_final       children have been announced to the parent; requests
                      and terminations arriving from them are pended and
                      re-emitted to the parent right before merge-complete.

A message that is not legal for the receiving phase raises
:class:`ProtocolViolation`; nothing is ever dropped silently.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from ..events import ActionPattern, EvalTypeError, Substitution, match
from ..formula import Formula
from ..synthesis import Mode, RFalsity, RHub, RLeaf, RTruth, resolve
from .messages import (
    EndOfTrace,
    Ev,
    MERGE_ACK,
    MERGE_COMPLETE,
    MERGE_FINAL,
    MergeAck,
    MergeComplete,
    MergeFinal,
    MergeMsg,
    MergeRequest,
    Terminated,
    ViolationReport,
)

SINK = -1  # destination pid for violation reports


class ProtocolViolation(Exception):
    """A message arrived in a phase where the protocol does not allow it."""

    def __init__(self, state, message, detail: str = ""):
        self.state = state
        self.message = message
        extra = f" ({detail})" if detail else ""
        super().__init__(
            f"{type(message).__name__} is not valid for {type(state).__name__}"
            f"{_phase_of(state)}{extra}"
        )


def _phase_of(state) -> str:
    if isinstance(state, HubState):
        return "/awaiting" if state.awaiting is not None else "/normal"
    if isinstance(state, MergingChildState):
        return f"/{state.phase}"
    return ""


# ---------------------------------------------------------------------------
# States

@dataclass
class LeafState:
    action: ActionPattern  # environment already applied
    body: Formula
    env: Substitution
    parent: Optional[int]


@dataclass
class HubState:
    children: tuple
    parent: Optional[int]
    awaiting: Optional[int] = None  # merging child, or None = normal phase
    event_buffer: tuple = ()        # Ev/EndOfTrace held back while awaiting
    deferred: tuple = ()            # control messages held back while awaiting


AWAIT_ACK = "await_ack"
AWAIT_FINAL = "await_final"


@dataclass
class MergingChildState:
    children: tuple
    parent: int
    phase: str = AWAIT_ACK
    pending: tuple = ()  # requests/terminations from children, re-emitted at final


HALT = object()  # sentinel next-state: the process terminates


@dataclass
class BecomeHub:
    """A leaf unfolded into a conjunction; the network must spawn the
    resolved children and install the new hub (or merging-child) state."""

    children: list  # list of Resolved subtrees
    request_merge: bool
    parent: Optional[int]


@dataclass
class Reaction:
    state: object  # new state, HALT, or None when `become` is set
    sends: list = field(default_factory=list)  # [(dst, msg)]
    become: Optional[BecomeHub] = None


# ---------------------------------------------------------------------------
# Leaf

def leaf_transition(pid: int, state: LeafState, sender: Optional[int], msg, mode: Mode) -> Reaction:
    if type(msg) is EndOfTrace:
        parent = state.parent
        return Reaction(HALT, [(parent, Terminated(pid))] if parent is not None else [])
    if type(msg) is not Ev:
        raise ProtocolViolation(state, msg)

    # Events always flow from the current parent, so the sender is the
    # parent even right after this leaf was adopted across a merge.
    parent = sender if sender is not None else state.parent
    sigma = match(state.action, msg.event)
    if sigma is None:
        # a non-matching action trivially satisfies the necessity
        return Reaction(HALT, [(parent, Terminated(pid))] if parent is not None else [])

    full_env = {**state.env, **sigma}
    try:
        resolved = resolve(state.body, full_env, mode)
    except EvalTypeError as err:
        err.event_index = msg.index
        raise
    if isinstance(resolved, RFalsity):
        return Reaction(HALT, [(SINK, ViolationReport(msg.index))])
    if isinstance(resolved, RTruth):
        return Reaction(HALT, [(parent, Terminated(pid))] if parent is not None else [])
    if isinstance(resolved, RLeaf):
        # process reuse: continue in place as the residual necessity
        return Reaction(LeafState(resolved.action, resolved.body, resolved.env, parent), [])
    assert isinstance(resolved, RHub)
    request = mode is Mode.RECONF and parent is not None
    sends = [(parent, MergeRequest(pid))] if request else []
    return Reaction(None, sends, BecomeHub(resolved.children, request, parent))


# ---------------------------------------------------------------------------
# Hub

def hub_transition(pid: int, state: HubState, sender: Optional[int], msg, mode: Mode) -> Reaction:
    if state.awaiting is None:
        return _hub_normal(pid, state, sender, msg, mode)
    return _hub_awaiting(pid, state, sender, msg, mode)


def _hub_normal(pid: int, state: HubState, sender, msg, mode: Mode) -> Reaction:
    kind = type(msg)
    if kind is Ev or kind is EndOfTrace:
        return Reaction(state, [(child, msg) for child in state.children])
    if kind is Terminated:
        if mode is Mode.BASELINE:
            return Reaction(state, [])  # child lists are static
        if msg.sender not in state.children:
            raise ProtocolViolation(state, msg, "terminated process is not a child")
        children = tuple(c for c in state.children if c != msg.sender)
        if children:
            return Reaction(replace(state, children=children), [])
        parent = state.parent
        return Reaction(HALT, [(parent, Terminated(pid))] if parent is not None else [])
    if kind is MergeRequest:
        if mode is not Mode.RECONF:
            raise ProtocolViolation(state, msg, "merging is reconf-only")
        if msg.sender not in state.children:
            raise ProtocolViolation(state, msg, "requesting process is not a child")
        return Reaction(replace(state, awaiting=msg.sender), [(msg.sender, MERGE_ACK)])
    raise ProtocolViolation(state, msg)


def _hub_awaiting(pid: int, state: HubState, sender, msg, mode: Mode) -> Reaction:
    kind = type(msg)
    if kind is Ev or kind is EndOfTrace:
        # mailbox doubles as a buffer until the merge completes
        return Reaction(replace(state, event_buffer=state.event_buffer + (msg,)), [])
    if kind is Terminated or kind is MergeRequest:
        return Reaction(replace(state, deferred=state.deferred + (msg,)), [])
    if kind is MergeMsg:
        if sender != state.awaiting:
            raise ProtocolViolation(state, msg, "merge-msg from an unexpected process")
        i = state.children.index(state.awaiting)
        children = state.children[:i] + tuple(msg.children) + state.children[i + 1 :]
        return Reaction(replace(state, children=children), [(state.awaiting, MERGE_FINAL)])
    if kind is MergeComplete:
        if sender != state.awaiting:
            raise ProtocolViolation(state, msg, "merge-complete from an unexpected process")
        sends = [
            (child, buffered)
            for buffered in state.event_buffer
            for child in state.children
        ]
        current: object = replace(state, awaiting=None, event_buffer=(), deferred=())
        # replay the control traffic that arrived during the merge, in order
        for deferred in state.deferred:
            if current is HALT:
                raise ProtocolViolation(state, deferred, "deferred message after hub halted")
            reaction = hub_transition(pid, current, None, deferred, mode)
            sends.extend(reaction.sends)
            current = reaction.state
        return Reaction(current, sends)
    raise ProtocolViolation(state, msg)


# ---------------------------------------------------------------------------
# Merging child

def merging_child_transition(
    pid: int, state: MergingChildState, sender: Optional[int], msg, mode: Mode
) -> Reaction:
    if mode is not Mode.RECONF:
        raise ProtocolViolation(state, msg, "merging is reconf-only")
    kind = type(msg)
    if state.phase == AWAIT_ACK:
        if kind is Ev or kind is EndOfTrace:
            # keep forwarding while the request is in flight
            return Reaction(state, [(child, msg) for child in state.children])
        if kind is MergeAck:
            # by per-pair FIFO every event the parent sent before this ack
            # has already been forwarded, so the announced child list is
            # exactly what the parent must adopt
            parent = sender if sender is not None else state.parent
            new = replace(state, parent=parent, phase=AWAIT_FINAL)
            return Reaction(new, [(parent, MergeMsg(state.children))])
        if kind is Terminated:
            if msg.sender not in state.children:
                raise ProtocolViolation(state, msg, "terminated process is not a child")
            children = tuple(c for c in state.children if c != msg.sender)
            return Reaction(replace(state, children=children), [])
        if kind is MergeRequest:
            return Reaction(replace(state, pending=state.pending + (msg,)), [])
        raise ProtocolViolation(state, msg)

    assert state.phase == AWAIT_FINAL
    if kind is MergeFinal:
        sends = [(state.parent, pend) for pend in state.pending]
        sends.append((state.parent, MERGE_COMPLETE))
        return Reaction(HALT, sends)
    if kind is Terminated or kind is MergeRequest:
        # children already belong to the parent; hand their traffic over
        return Reaction(replace(state, pending=state.pending + (msg,)), [])
    raise ProtocolViolation(state, msg)
