"""Values, trace events, action patterns, matching, and boolean tests.

Data values are arbitrary-precision integers, atoms (interned lowercase
identifiers such as ``srv`` or ``c1``), and tuples of values.  A trace
event is a fully closed action: a direction (``?`` receive, ``!`` send),
a target value, a payload value, and its 1-based position in the trace.

Action patterns are open actions.  A pattern position is either a literal,
a wildcard, a binding variable occurrence (:class:`PVar`), or a reference
to a variable bound further out (:class:`PRef`).  The parser emits only
``PVar``; the well-formedness pass in :mod:`shmlmon.formula` rewrites
occurrences of already-bound names into ``PRef`` so that substitution can
tell binders and uses apart even after recursive unfolding duplicates
binder names.

Equality and ordering comparisons are total across value kinds
(Int < Atom < Tuple); arithmetic is defined on integers only and raises
:class:`EvalTypeError` otherwise, signalling an ill-typed formula/trace
pairing rather than a verdict.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

# ---------------------------------------------------------------------------
# Values

@dataclass(frozen=True)
class Int:
    n: int

    def __str__(self):
        return str(self.n)


@dataclass(frozen=True)
class Atom:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Tup:
    items: tuple["Value", ...]

    def __str__(self):
        return "{" + ",".join(str(i) for i in self.items) + "}"


Value = Union[Int, Atom, Tup]

_KIND_RANK = {Int: 0, Atom: 1, Tup: 2}


def compare_values(a: Value, b: Value) -> int:
    """Total cross-type order: Int < Atom < Tuple; ints numerically, atoms
    lexically, tuples by length then elementwise."""
    ra, rb = _KIND_RANK[type(a)], _KIND_RANK[type(b)]
    if ra != rb:
        return -1 if ra < rb else 1
    if isinstance(a, Int):
        return -1 if a.n < b.n else (0 if a.n == b.n else 1)
    if isinstance(a, Atom):
        return -1 if a.name < b.name else (0 if a.name == b.name else 1)
    if len(a.items) != len(b.items):
        return -1 if len(a.items) < len(b.items) else 1
    for x, y in zip(a.items, b.items):
        c = compare_values(x, y)
        if c != 0:
            return c
    return 0


# ---------------------------------------------------------------------------
# Patterns and events

@dataclass(frozen=True)
class PVar:
    """Binding occurrence of a term variable."""
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class PRef:
    """Use of a term variable bound by an enclosing pattern."""
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class PWild:
    def __str__(self):
        return "_"


@dataclass(frozen=True)
class PLit:
    value: Value

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class PTup:
    items: tuple["Pattern", ...]

    def __str__(self):
        return "{" + ",".join(str(i) for i in self.items) + "}"


Pattern = Union[PVar, PRef, PWild, PLit, PTup]

WILD = PWild()


@dataclass(frozen=True)
class ActionPattern:
    direction: str  # "?" receive, "!" send
    target: Pattern
    payload: Pattern

    def __str__(self):
        return f"{self.target} {self.direction} {self.payload}"


@dataclass(frozen=True)
class Event:
    direction: str
    target: Value
    payload: Value
    index: int  # 1-based position in the global trace

    def __str__(self):
        return f"{self.target} {self.direction} {self.payload}"


Substitution = dict  # maps variable name -> Value


def pattern_vars(p: Pattern, acc: Optional[list] = None) -> list:
    """Binding variables of a pattern, in left-to-right order, no repeats."""
    if acc is None:
        acc = []
    if isinstance(p, PVar):
        if p.name not in acc:
            acc.append(p.name)
    elif isinstance(p, PTup):
        for item in p.items:
            pattern_vars(item, acc)
    return acc


def action_vars(a: ActionPattern) -> list:
    acc: list = []
    pattern_vars(a.target, acc)
    pattern_vars(a.payload, acc)
    return acc


def pattern_is_closed(p: Pattern) -> bool:
    if isinstance(p, (PVar, PRef, PWild)):
        return False
    if isinstance(p, PTup):
        return all(pattern_is_closed(i) for i in p.items)
    return True


def pattern_to_value(p: Pattern) -> Value:
    """Convert a closed pattern to the value it denotes."""
    if isinstance(p, PLit):
        return p.value
    if isinstance(p, PTup):
        return Tup(tuple(pattern_to_value(i) for i in p.items))
    raise ValueError(f"pattern is not closed: {p}")


# ---------------------------------------------------------------------------
# Matching

def _match_pattern(p: Pattern, v: Value, binding: dict) -> bool:
    if isinstance(p, PWild):
        return True
    if isinstance(p, PLit):
        return p.value == v
    if isinstance(p, PVar):
        # A repeated occurrence of the same variable within one action
        # imposes equality with the value bound first.
        if p.name in binding:
            return binding[p.name] == v
        binding[p.name] = v
        return True
    if isinstance(p, PRef):
        if p.name not in binding:
            raise ValueError(
                f"unresolved variable reference '{p.name}' in pattern; "
                "apply the enclosing substitution before matching"
            )
        return binding[p.name] == v
    if isinstance(p, PTup):
        if not isinstance(v, Tup) or len(p.items) != len(v.items):
            return False
        return all(_match_pattern(pi, vi, binding) for pi, vi in zip(p.items, v.items))
    raise TypeError(f"not a pattern: {p!r}")


def match(action: ActionPattern, event: Event) -> Optional[Substitution]:
    """Match an action pattern against a closed event.

    Returns the unique substitution binding the pattern's variables so the
    pattern equals the event, or None when no such substitution exists.
    """
    if action.direction != event.direction:
        return None
    binding: dict = {}
    if not _match_pattern(action.target, event.target, binding):
        return None
    if not _match_pattern(action.payload, event.payload, binding):
        return None
    return binding


def subst_pattern(p: Pattern, s: Substitution) -> Pattern:
    """Replace variable references by their values; binders are untouched."""
    if isinstance(p, PRef) and p.name in s:
        return PLit(s[p.name])
    if isinstance(p, PTup):
        return PTup(tuple(subst_pattern(i, s) for i in p.items))
    return p


def subst_action(a: ActionPattern, s: Substitution) -> ActionPattern:
    return ActionPattern(a.direction, subst_pattern(a.target, s), subst_pattern(a.payload, s))


# ---------------------------------------------------------------------------
# Boolean expressions

@dataclass(frozen=True)
class AVar:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class ALit:
    value: Value

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class ABin:
    op: str  # "+", "-", "*"
    lhs: "Arith"
    rhs: "Arith"

    def __str__(self):
        return f"{self.lhs} {self.op} {self.rhs}"


Arith = Union[AVar, ALit, ABin]


@dataclass(frozen=True)
class Cmp:
    op: str  # "==", "!=", "<", "<=", ">", ">="
    lhs: Arith
    rhs: Arith

    def __str__(self):
        return f"{self.lhs} {self.op} {self.rhs}"


@dataclass(frozen=True)
class BNot:
    arg: "BoolExpr"

    def __str__(self):
        return f"not {_paren(self.arg)}"


@dataclass(frozen=True)
class BAnd:
    lhs: "BoolExpr"
    rhs: "BoolExpr"

    def __str__(self):
        return f"{_paren(self.lhs)} and {_paren(self.rhs)}"


@dataclass(frozen=True)
class BOr:
    lhs: "BoolExpr"
    rhs: "BoolExpr"

    def __str__(self):
        return f"{_paren_or(self.lhs)} or {_paren_or(self.rhs)}"


BoolExpr = Union[Cmp, BNot, BAnd, BOr]


def _paren(b) -> str:
    return f"({b})" if isinstance(b, (BAnd, BOr)) else str(b)


def _paren_or(b) -> str:
    return f"({b})" if isinstance(b, BOr) else str(b)


class EvalTypeError(Exception):
    """Arithmetic met a non-integer operand (or an unbound variable).

    Signals an ill-typed formula/trace pairing.  The monitor runtime and the
    oracle surface this as a monitoring fault, never as a verdict.
    """

    def __init__(self, expression, operand, event_index: Optional[int] = None):
        self.expression = expression
        self.operand = operand
        self.event_index = event_index
        at = f" at event {event_index}" if event_index is not None else ""
        super().__init__(f"ill-typed arithmetic in '{expression}' on operand '{operand}'{at}")


def bool_vars(b, acc: Optional[list] = None) -> list:
    """Free term variables of a boolean expression, in occurrence order."""
    if acc is None:
        acc = []
    if isinstance(b, AVar):
        if b.name not in acc:
            acc.append(b.name)
    elif isinstance(b, ABin):
        bool_vars(b.lhs, acc)
        bool_vars(b.rhs, acc)
    elif isinstance(b, Cmp):
        bool_vars(b.lhs, acc)
        bool_vars(b.rhs, acc)
    elif isinstance(b, BNot):
        bool_vars(b.arg, acc)
    elif isinstance(b, (BAnd, BOr)):
        bool_vars(b.lhs, acc)
        bool_vars(b.rhs, acc)
    return acc


def subst_arith(a: Arith, s: Substitution) -> Arith:
    if isinstance(a, AVar) and a.name in s:
        return ALit(s[a.name])
    if isinstance(a, ABin):
        return ABin(a.op, subst_arith(a.lhs, s), subst_arith(a.rhs, s))
    return a


def subst_bool(b: BoolExpr, s: Substitution) -> BoolExpr:
    if isinstance(b, Cmp):
        return Cmp(b.op, subst_arith(b.lhs, s), subst_arith(b.rhs, s))
    if isinstance(b, BNot):
        return BNot(subst_bool(b.arg, s))
    if isinstance(b, BAnd):
        return BAnd(subst_bool(b.lhs, s), subst_bool(b.rhs, s))
    if isinstance(b, BOr):
        return BOr(subst_bool(b.lhs, s), subst_bool(b.rhs, s))
    raise TypeError(f"not a boolean expression: {b!r}")


def eval_arith(a: Arith) -> Value:
    if isinstance(a, ALit):
        return a.value
    if isinstance(a, AVar):
        raise EvalTypeError(a, a.name)
    if isinstance(a, ABin):
        lhs = eval_arith(a.lhs)
        rhs = eval_arith(a.rhs)
        if not isinstance(lhs, Int):
            raise EvalTypeError(a, lhs)
        if not isinstance(rhs, Int):
            raise EvalTypeError(a, rhs)
        if a.op == "+":
            return Int(lhs.n + rhs.n)
        if a.op == "-":
            return Int(lhs.n - rhs.n)
        if a.op == "*":
            return Int(lhs.n * rhs.n)
        raise ValueError(f"unknown arithmetic operator {a.op!r}")
    raise TypeError(f"not an arithmetic expression: {a!r}")


def eval_bool(b: BoolExpr) -> bool:
    """Evaluate a closed boolean expression.  Total on well-typed input.

    Both operands of a connective are evaluated (no short-circuiting) so
    that ill-typed subexpressions fault identically wherever they appear.
    """
    if isinstance(b, Cmp):
        lhs = eval_arith(b.lhs)
        rhs = eval_arith(b.rhs)
        c = compare_values(lhs, rhs)
        if b.op == "==":
            return c == 0
        if b.op == "!=":
            return c != 0
        if b.op == "<":
            return c < 0
        if b.op == "<=":
            return c <= 0
        if b.op == ">":
            return c > 0
        if b.op == ">=":
            return c >= 0
        raise ValueError(f"unknown comparison operator {b.op!r}")
    if isinstance(b, BNot):
        return not eval_bool(b.arg)
    if isinstance(b, BAnd):
        lhs = eval_bool(b.lhs)
        rhs = eval_bool(b.rhs)
        return lhs and rhs
    if isinstance(b, BOr):
        lhs = eval_bool(b.lhs)
        rhs = eval_bool(b.rhs)
        return lhs or rhs
    raise TypeError(f"not a boolean expression: {b!r}")
