"""Safety-formula ASTs: validation, renaming, flattening, and unfolding.

The formula language is the safety fragment of Hennessy-Milner logic with
maximal fixpoints: truth/falsity constants, conjunction, necessity over an
action pattern, recursion variables bound by ``max``, and conditionals over
data bound by enclosing necessities.

`check_wellformed` is the single entry point that turns a raw parsed
formula into something the oracle and synthesis accept.  It
  * resolves every pattern/boolean variable occurrence against the scope of
    enclosing necessity binders (rewriting in-scope pattern names to
    :class:`~shmlmon.events.PRef`),
  * rejects unbound recursion variables, unbound data variables, and
    recursion variables not guarded by at least one necessity,
  * deterministically renames duplicate binders apart (numeric suffixes,
    assigned in left-to-right binder order),
and reports all problems at once.

All functions are pure over immutable ASTs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .events import (
    ActionPattern,
    AVar,
    ABin,
    BAnd,
    BNot,
    BOr,
    BoolExpr,
    Cmp,
    PLit,
    PRef,
    PTup,
    PVar,
    PWild,
    Substitution,
    subst_action,
    subst_bool,
)

# ---------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Truth:
    def __str__(self):
        return "tt"


@dataclass(frozen=True)
class Falsity:
    def __str__(self):
        return "ff"


@dataclass(frozen=True)
class Conj:
    children: tuple["Formula", ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("conjunction needs at least two children")

    def __str__(self):
        return pretty(self)


@dataclass(frozen=True)
class Nec:
    action: ActionPattern
    body: "Formula"

    def __str__(self):
        return pretty(self)


@dataclass(frozen=True)
class FVar:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Max:
    name: str
    body: "Formula"

    def __str__(self):
        return pretty(self)


@dataclass(frozen=True)
class Cond:
    test: BoolExpr
    then_branch: "Formula"
    else_branch: "Formula"

    def __str__(self):
        return pretty(self)


Formula = Union[Truth, Falsity, Conj, Nec, FVar, Max, Cond]

TT = Truth()
FF = Falsity()


# ---------------------------------------------------------------------------
# Pretty printing (inverse of the parser)

def pretty(f: Formula) -> str:
    if isinstance(f, Truth):
        return "tt"
    if isinstance(f, Falsity):
        return "ff"
    if isinstance(f, FVar):
        return f.name
    if isinstance(f, Max):
        return f"max {f.name}. {pretty(f.body)}"
    if isinstance(f, Cond):
        return f"if {f.test} then {pretty(f.then_branch)} else {pretty(f.else_branch)}"
    if isinstance(f, Nec):
        # necessity binds tighter than '&': parenthesize a conjunction body
        body = pretty(f.body)
        if isinstance(f.body, Conj):
            body = f"({body})"
        return f"[{f.action}] {body}"
    if isinstance(f, Conj):
        parts = []
        for i, child in enumerate(f.children):
            text = pretty(child)
            # '&' is right-associative and lowest precedence; anything that
            # would swallow the following '&' (a conjunction on the left, or
            # a subformula ending in a max/if body that extends maximally
            # right) needs parentheses.
            last = i == len(f.children) - 1
            if isinstance(child, Conj) or (not last and _extends_right(child)):
                text = f"({text})"
            parts.append(text)
        return " & ".join(parts)
    raise TypeError(f"not a formula: {f!r}")


def _extends_right(f: Formula) -> bool:
    """Whether this formula's printed form would absorb a following '&'."""
    if isinstance(f, (Max, Cond)):
        return True
    if isinstance(f, Nec):
        return _extends_right(f.body)
    return False


# ---------------------------------------------------------------------------
# Well-formedness

@dataclass(frozen=True)
class UnboundVariable:
    name: str
    location: str

    def __str__(self):
        return f"unbound variable '{self.name}' at {self.location}"


@dataclass(frozen=True)
class UnguardedRecursion:
    name: str

    def __str__(self):
        return f"recursion variable '{self.name}' is not guarded by a necessity"


class WellFormednessError(Exception):
    """Aggregates every binding/guardedness problem found in one pass."""

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(str(i) for i in self.issues))


@dataclass
class WellFormedFormula:
    """A closed, guarded formula with pairwise-distinct binder names.

    ``binder_index`` maps the path of each variable occurrence to the path
    of its binding site.  Paths are tuples of steps from the root: integers
    select conjunction children, and the strings ``body``/``then``/``else``/
    ``action``/``test`` select the respective components.
    """

    formula: Formula
    binder_index: dict

    def __str__(self):
        return pretty(self.formula)


def _loc(path: tuple) -> str:
    return "root" if not path else ".".join(str(p) for p in path)


class _Resolver:
    """Scope resolution, guardedness checking, and deterministic renaming."""

    def __init__(self, census: set):
        self.census = census  # every identifier in the source formula
        self.used: set = set()  # final names already assigned to binders
        self.issues: list = []
        self.binder_index: dict = {}

    def fresh(self, name: str) -> str:
        # First binder with a given name keeps it; later duplicates get the
        # smallest numeric suffix that collides with nothing in the formula.
        if name not in self.used:
            self.used.add(name)
            return name
        k = 1
        while f"{name}{k}" in self.used or f"{name}{k}" in self.census:
            k += 1
        final = f"{name}{k}"
        self.used.add(final)
        return final

    # term_env: name -> (final_name, binder_path)
    # fvar_env: name -> (final_name, binder_path, nec_depth_at_binder)
    def formula(self, f, term_env, fvar_env, nec_depth, path):
        if isinstance(f, (Truth, Falsity)):
            return f
        if isinstance(f, FVar):
            if f.name not in fvar_env:
                self.issues.append(UnboundVariable(f.name, _loc(path)))
                return f
            final, binder_path, binder_depth = fvar_env[f.name]
            if nec_depth == binder_depth:
                self.issues.append(UnguardedRecursion(final))
            self.binder_index[path] = binder_path
            return FVar(final)
        if isinstance(f, Max):
            final = self.fresh(f.name)
            env = dict(fvar_env)
            env[f.name] = (final, path, nec_depth)
            body = self.formula(f.body, term_env, env, nec_depth, path + ("body",))
            return Max(final, body)
        if isinstance(f, Conj):
            children = tuple(
                self.formula(c, term_env, fvar_env, nec_depth, path + (i,))
                for i, c in enumerate(f.children)
            )
            return Conj(children)
        if isinstance(f, Cond):
            test = self.boolexpr(f.test, term_env, path + ("test",))
            then = self.formula(f.then_branch, term_env, fvar_env, nec_depth, path + ("then",))
            other = self.formula(f.else_branch, term_env, fvar_env, nec_depth, path + ("else",))
            return Cond(test, then, other)
        if isinstance(f, Nec):
            env = dict(term_env)
            target = self.pattern(f.action.target, env, path + ("action",))
            payload = self.pattern(f.action.payload, env, path + ("action",))
            action = ActionPattern(f.action.direction, target, payload)
            body = self.formula(f.body, env, fvar_env, nec_depth + 1, path + ("body",))
            return Nec(action, body)
        raise TypeError(f"not a formula: {f!r}")

    def pattern(self, p, term_env, path):
        if isinstance(p, (PWild, PLit)):
            return p
        if isinstance(p, (PVar, PRef)):
            if p.name in term_env:
                final, binder_path = term_env[p.name]
                self.binder_index[path + (p.name,)] = binder_path
                return PRef(final)
            if isinstance(p, PRef):
                # a reference must resolve; a raw formula only carries PVar
                self.issues.append(UnboundVariable(p.name, _loc(path)))
                return p
            final = self.fresh(p.name)
            term_env[p.name] = (final, path + (final,))
            return PVar(final)
        if isinstance(p, PTup):
            return PTup(tuple(self.pattern(i, term_env, path) for i in p.items))
        raise TypeError(f"not a pattern: {p!r}")

    def boolexpr(self, b, term_env, path):
        if isinstance(b, Cmp):
            return Cmp(b.op, self.arith(b.lhs, term_env, path), self.arith(b.rhs, term_env, path))
        if isinstance(b, BNot):
            return BNot(self.boolexpr(b.arg, term_env, path))
        if isinstance(b, BAnd):
            return BAnd(self.boolexpr(b.lhs, term_env, path), self.boolexpr(b.rhs, term_env, path))
        if isinstance(b, BOr):
            return BOr(self.boolexpr(b.lhs, term_env, path), self.boolexpr(b.rhs, term_env, path))
        raise TypeError(f"not a boolean expression: {b!r}")

    def arith(self, a, term_env, path):
        if isinstance(a, AVar):
            if a.name not in term_env:
                self.issues.append(UnboundVariable(a.name, _loc(path)))
                return a
            final, binder_path = term_env[a.name]
            self.binder_index[path + (a.name,)] = binder_path
            return AVar(final)
        if isinstance(a, ABin):
            return ABin(a.op, self.arith(a.lhs, term_env, path), self.arith(a.rhs, term_env, path))
        return a


def _all_names(f, acc: set):
    """Every variable identifier appearing anywhere, so renaming never
    collides with a name already in use."""
    if isinstance(f, (Truth, Falsity)):
        return
    if isinstance(f, FVar):
        acc.add(f.name)
        return
    if isinstance(f, Max):
        acc.add(f.name)
        _all_names(f.body, acc)
        return
    if isinstance(f, Conj):
        for c in f.children:
            _all_names(c, acc)
        return
    if isinstance(f, Cond):
        _bool_names(f.test, acc)
        _all_names(f.then_branch, acc)
        _all_names(f.else_branch, acc)
        return
    if isinstance(f, Nec):
        _pattern_names(f.action.target, acc)
        _pattern_names(f.action.payload, acc)
        _all_names(f.body, acc)
        return
    raise TypeError(f"not a formula: {f!r}")


def _pattern_names(p, acc: set):
    if isinstance(p, (PVar, PRef)):
        acc.add(p.name)
    elif isinstance(p, PTup):
        for i in p.items:
            _pattern_names(i, acc)


def _bool_names(b, acc: set):
    if isinstance(b, AVar):
        acc.add(b.name)
    elif isinstance(b, (ABin, Cmp, BAnd, BOr)):
        _bool_names(b.lhs, acc)
        _bool_names(b.rhs, acc)
    elif isinstance(b, BNot):
        _bool_names(b.arg, acc)


def check_wellformed(f: Formula) -> WellFormedFormula:
    """Validate and normalize a formula; raise WellFormednessError listing
    every problem if it is not closed and guarded."""
    names: set = set()
    _all_names(f, names)
    resolver = _Resolver(census=names)
    resolved = resolver.formula(f, {}, {}, 0, ())
    if resolver.issues:
        raise WellFormednessError(resolver.issues)
    return WellFormedFormula(resolved, resolver.binder_index)


# ---------------------------------------------------------------------------
# Conjunction flattening

def _flatten(f: Formula) -> Formula:
    if isinstance(f, Conj):
        out = []
        for child in f.children:
            fc = _flatten(child)
            if isinstance(fc, Conj):
                out.extend(fc.children)
            else:
                out.append(fc)
        return Conj(tuple(out))
    if isinstance(f, Nec):
        return Nec(f.action, _flatten(f.body))
    if isinstance(f, Max):
        return Max(f.name, _flatten(f.body))
    if isinstance(f, Cond):
        return Cond(f.test, _flatten(f.then_branch), _flatten(f.else_branch))
    return f


def flatten_conjunctions(wf):
    """Splice nested conjunctions into their parent, preserving source
    order.  Accepts and returns either a bare Formula or a WellFormedFormula."""
    if isinstance(wf, WellFormedFormula):
        return check_wellformed(_flatten(wf.formula))
    return _flatten(wf)


# ---------------------------------------------------------------------------
# Substitution and unfolding

def subst_formula(f: Formula, s: Substitution) -> Formula:
    """Replace free term-variable occurrences by values.

    Pattern binders shield their name inside the necessity body, so copies
    of a subformula embedded by recursive unfolding keep their own scope.
    """
    if not s:
        return f
    if isinstance(f, (Truth, Falsity, FVar)):
        return f
    if isinstance(f, Conj):
        return Conj(tuple(subst_formula(c, s) for c in f.children))
    if isinstance(f, Max):
        return Max(f.name, subst_formula(f.body, s))
    if isinstance(f, Cond):
        return Cond(subst_bool(f.test, s), subst_formula(f.then_branch, s), subst_formula(f.else_branch, s))
    if isinstance(f, Nec):
        action = subst_action(f.action, s)
        bound = set()
        _binder_names(action.target, bound)
        _binder_names(action.payload, bound)
        inner = {k: v for k, v in s.items() if k not in bound} if bound & s.keys() else s
        return Nec(action, subst_formula(f.body, inner))
    raise TypeError(f"not a formula: {f!r}")


def _binder_names(p, acc: set):
    if isinstance(p, PVar):
        acc.add(p.name)
    elif isinstance(p, PTup):
        for i in p.items:
            _binder_names(i, acc)


def apply_subst(x, s: Substitution):
    """Substitution over a formula, an action pattern, or a boolean test."""
    if isinstance(x, ActionPattern):
        return subst_action(x, s)
    if isinstance(x, (Cmp, BNot, BAnd, BOr)):
        return subst_bool(x, s)
    return subst_formula(x, s)


def subst_fvar(f: Formula, name: str, replacement: Formula) -> Formula:
    if isinstance(f, FVar):
        return replacement if f.name == name else f
    if isinstance(f, Max):
        if f.name == name:  # inner binder shadows
            return f
        return Max(f.name, subst_fvar(f.body, name, replacement))
    if isinstance(f, Conj):
        return Conj(tuple(subst_fvar(c, name, replacement) for c in f.children))
    if isinstance(f, Nec):
        return Nec(f.action, subst_fvar(f.body, name, replacement))
    if isinstance(f, Cond):
        return Cond(f.test, subst_fvar(f.then_branch, name, replacement),
                    subst_fvar(f.else_branch, name, replacement))
    return f


def unfold_max(m: Max) -> Formula:
    """One unrolling: the body with every free occurrence of the recursion
    variable replaced by the whole fixpoint formula."""
    if not isinstance(m, Max):
        raise TypeError(f"not a max formula: {m!r}")
    return subst_fvar(m.body, m.name, m)
