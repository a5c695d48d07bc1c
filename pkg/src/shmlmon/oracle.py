"""Sequential reference evaluator.

Computes the ground-truth verdict of a closed, guarded formula over a
finite trace by plain formula rewriting, independent of the concurrent
monitor runtime.  The working state is a multiset of residual obligations,
each rooted at a necessity; satisfied obligations are discarded, nested
structure (conjunction, conditionals, fixpoints) is resolved eagerly.

A verdict is either a violation carrying the 1-based index of the trace
event that triggered it (index 0 when the formula is violated before any
event, i.e. it contains a reachable ``ff`` outright), or "no violation",
meaning the trace ended without one.  Safety formulas never certify
success: "no violation" is not "satisfied".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .events import EvalTypeError, Event, eval_bool, match
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
    subst_formula,
    unfold_max,
)


@dataclass(frozen=True)
class Verdict:
    violation_index: Optional[int] = None

    @property
    def is_violation(self) -> bool:
        return self.violation_index is not None

    def __str__(self):
        if self.is_violation:
            return f"violation at event {self.violation_index}"
        return "no violation"


NO_VIOLATION = Verdict()


def violation(index: int) -> Verdict:
    return Verdict(index)


def normalize(f: Formula) -> Optional[list]:
    """Rewrite a closed formula into its residual necessity obligations.

    Truth contributes nothing; a conjunction contributes the union of its
    children's obligations; a conditional contributes its selected branch;
    a fixpoint is unfolded once (guardedness bounds this); a necessity is
    itself an obligation.  Returns None when a reachable falsity makes the
    formula already violated.
    """
    if isinstance(f, Truth):
        return []
    if isinstance(f, Falsity):
        return None
    if isinstance(f, Nec):
        return [f]
    if isinstance(f, Conj):
        out = []
        for child in f.children:
            sub = normalize(child)
            if sub is None:
                return None
            out.extend(sub)
        return out
    if isinstance(f, Cond):
        branch = f.then_branch if eval_bool(f.test) else f.else_branch
        return normalize(branch)
    if isinstance(f, Max):
        return normalize(unfold_max(f))
    if isinstance(f, FVar):
        raise ValueError(f"open formula reached the evaluator: free {f.name}")
    raise TypeError(f"not a formula: {f!r}")


def step_obligation(obligations: list, event: Event) -> Optional[list]:
    """Advance every pending obligation by one trace event.

    A necessity whose pattern matches the event is replaced by its
    instantiated body's obligations; one that does not match is discharged
    outright (a non-matching action trivially satisfies it).  Returns None
    when some instantiated body is already violated.
    """
    out = []
    for ob in obligations:
        sigma = match(ob.action, event)
        if sigma is None:
            continue
        try:
            sub = normalize(subst_formula(ob.body, sigma))
        except EvalTypeError as err:
            err.event_index = event.index
            raise
        if sub is None:
            return None
        out.extend(sub)
    return out


def oracle_verdict(f, trace: list) -> Verdict:
    """Fold the trace through the rewriter; first violation wins."""
    if isinstance(f, WellFormedFormula):
        f = f.formula
    obligations = normalize(f)
    if obligations is None:
        return violation(0)
    for event in trace:
        if not obligations:
            return NO_VIOLATION
        obligations = step_obligation(obligations, event)
        if obligations is None:
            return violation(event.index)
    return NO_VIOLATION
