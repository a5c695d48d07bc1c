"""Compile a well-formed formula into a static monitor plan.

Three synthesis modes:

* ``baseline`` - conjunction combinators mirror the syntactic binary
  conjunctions, so nested conjunctions become cascading two-child hubs,
  and terminated children are never pruned.
* ``multi``    - nested conjunctions are flattened into a single n-ary hub
  and terminated children are pruned from their parent's list.
* ``reconf``   - multi plus dynamic reorganisation: a child that unfolds
  into a conjunction-rooted subsystem merges its children into its parent
  hub through a six-step handshake, converging to a flat spider topology.

A plan is a tree of hubs (conjunction forwarders) and necessity leaves.
Verdict constants never get processes of their own: truths are dropped and
a reachable falsity collapses the plan to an immediate-violation stub.
The same residual resolver drives both static compilation here and the
leaf-unfolding steps inside the runtime.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Union

from .events import ActionPattern, Substitution, eval_bool, subst_action, subst_bool
from .formula import (
    Cond,
    Conj,
    Falsity,
    Formula,
    FVar,
    Max,
    Nec,
    Truth,
    WellFormedFormula,
    pretty,
    unfold_max,
)


class Mode(enum.Enum):
    BASELINE = "baseline"
    MULTI = "multi"
    RECONF = "reconf"

    def __str__(self):
        return self.value


# ---------------------------------------------------------------------------
# Residual resolution (shared by static synthesis and runtime unfolding)

@dataclass(frozen=True)
class RTruth:
    pass


@dataclass(frozen=True)
class RFalsity:
    pass


@dataclass
class RLeaf:
    action: ActionPattern  # environment already applied
    body: Formula
    env: Substitution


@dataclass
class RHub:
    children: list


Resolved = Union[RTruth, RFalsity, RLeaf, RHub]

R_TRUTH = RTruth()
R_FALSITY = RFalsity()


def resolve(f: Formula, env: Substitution, mode: Mode) -> Resolved:
    """Reduce a formula under an environment to its monitor shape:
    discharged, violated, a single necessity leaf, or a hub of children."""
    if isinstance(f, Truth):
        return R_TRUTH
    if isinstance(f, Falsity):
        return R_FALSITY
    if isinstance(f, Nec):
        return RLeaf(subst_action(f.action, env), f.body, dict(env))
    if isinstance(f, Max):
        return resolve(unfold_max(f), env, mode)
    if isinstance(f, Cond):
        test = subst_bool(f.test, env)
        branch = f.then_branch if eval_bool(test) else f.else_branch
        return resolve(branch, env, mode)
    if isinstance(f, Conj):
        live = []
        for child in f.children:
            sub = resolve(child, env, mode)
            if isinstance(sub, RFalsity):
                return R_FALSITY
            if isinstance(sub, RTruth):
                continue
            if isinstance(sub, RHub) and mode is not Mode.BASELINE:
                live.extend(sub.children)  # flatten nested hubs
            else:
                live.append(sub)
        if not live:
            return R_TRUTH
        if len(live) == 1:
            return live[0]
        if mode is Mode.BASELINE and len(live) > 2:
            # baseline hubs are strictly binary; fold right-associatively
            node = RHub(live[-2:])
            for item in reversed(live[:-2]):
                node = RHub([item, node])
            return node
        return RHub(live)
    if isinstance(f, FVar):
        raise ValueError(f"open formula reached synthesis: free {f.name}")
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Static plans

@dataclass
class NecNode:
    action: ActionPattern
    body: Formula
    env: Substitution = field(default_factory=dict)


@dataclass
class Hub:
    children: list


@dataclass
class TruthPlan:
    """Degenerate plan: every obligation already discharged."""


@dataclass
class FalsityPlan:
    """Degenerate plan: violated before any event."""


PlanNode = Union[NecNode, Hub, TruthPlan, FalsityPlan]


@dataclass
class MonitorPlan:
    root: PlanNode
    mode: Mode


def _to_plan_node(r: Resolved) -> PlanNode:
    if isinstance(r, RTruth):
        return TruthPlan()
    if isinstance(r, RFalsity):
        return FalsityPlan()
    if isinstance(r, RLeaf):
        return NecNode(r.action, r.body, dict(r.env))
    return Hub([_to_plan_node(c) for c in r.children])


def synthesize(f, mode: Mode) -> MonitorPlan:
    """Compile a closed, guarded formula into a monitor plan for a mode."""
    if isinstance(f, WellFormedFormula):
        f = f.formula
    return MonitorPlan(_to_plan_node(resolve(f, {}, mode)), mode)


def plan_stats(plan) -> dict:
    """Hub count, leaf count, and maximum root-to-leaf depth (root = 1).
    Iterative: unpruned chains outgrow the recursion limit."""
    root = plan.root if isinstance(plan, MonitorPlan) else plan
    hubs = leaves = depth = 0
    stack = [(root, 1)]
    while stack:
        node, level = stack.pop()
        if isinstance(node, (TruthPlan, FalsityPlan)):
            continue
        if level > depth:
            depth = level
        if isinstance(node, NecNode):
            leaves += 1
            continue
        hubs += 1
        stack.extend((child, level + 1) for child in node.children)
    return {"hubs": hubs, "leaves": leaves, "depth": depth}


def render_plan(plan, indent: str = "  ") -> str:
    """Indented-tree rendering, also used for runtime topology snapshots."""
    root = plan.root if isinstance(plan, MonitorPlan) else plan
    lines: list = []
    stack = [(root, 0)]
    while stack:
        node, level = stack.pop()
        pad = indent * level
        if isinstance(node, TruthPlan):
            lines.append(f"{pad}discharged")
        elif isinstance(node, FalsityPlan):
            lines.append(f"{pad}violated")
        elif isinstance(node, NecNode):
            body = pretty(node.body)
            if len(body) > 72:
                body = body[:69] + "..."
            lines.append(f"{pad}leaf [{node.action}] {body}")
        else:
            lines.append(f"{pad}hub")
            stack.extend((child, level + 1) for child in reversed(node.children))
    return "\n".join(lines)


def plan_stats_json(plan) -> str:
    return json.dumps(plan_stats(plan), sort_keys=True)
