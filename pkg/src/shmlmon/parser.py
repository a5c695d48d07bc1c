"""Concrete syntax for formulas and traces.

Formula grammar (``&`` is right-associative and lowest precedence, a
necessity binds tighter than ``&``, and ``max X.`` extends maximally
to the right)::

    formula  := "tt" | "ff" | nec | conj | maxf | cond | fvar | "(" formula ")"
    conj     := formula "&" formula
    nec      := "[" action "]" formula
    maxf     := "max" FVARNAME "." formula
    cond     := "if" boolexpr "then" formula "else" formula
    action   := pat ("!"|"?") pat          "!" send / "?" receive
    pat      := VAR | "_" | INT | ATOM | "{" pat ("," pat)* "}"
    boolexpr := cmp | boolexpr ("or"|"and") boolexpr | "not" boolexpr
              | "(" boolexpr ")"
    cmp      := arith ("=="|"!="|"<"|"<="|">"|">=") arith
    arith    := operand (("+"|"-"|"*") operand)*
    operand  := VAR | INT | ATOM

Lexical conventions: formula variables start uppercase (``X``); term
variables are the single letters ``u``-``z`` with an optional numeric
suffix (``x``, ``y``, ``z1``); any other lowercase identifier is an atom
(``srv``, ``c1``, ``done``).  ``#`` starts a comment to end of line.

Trace files carry one closed event per line, ``<target> ? <value>`` for a
receive or ``<target> ! <value>`` for a send, e.g. ``srv ? {5,c1}``.
Events are numbered 1..n in file order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .events import (
    ABin,
    ALit,
    Atom,
    AVar,
    ActionPattern,
    BAnd,
    BNot,
    BOr,
    Cmp,
    Event,
    Int,
    PLit,
    PTup,
    PVar,
    WILD,
    pattern_is_closed,
    pattern_to_value,
)
from .formula import Cond, Conj, FF, Formula, FVar, Max, Nec, TT


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        self.line = line
        self.col = col
        super().__init__(f"line {line}, col {col}: {message}")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


KEYWORDS = {"max", "if", "then", "else", "tt", "ff", "not", "and", "or"}

_TWO_CHAR = ("==", "!=", "<=", ">=")
_ONE_CHAR = "[](){},.&!?<>+-*"
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INT = re.compile(r"[0-9]+")
_TERM_VAR = re.compile(r"[u-z][0-9]*\Z")


def tokenize(text: str, first_line: int = 1) -> list:
    tokens = []
    line = first_line
    col = 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        two = text[i : i + 2]
        if two in _TWO_CHAR:
            tokens.append(Token(two, two, line, col))
            i += 2
            col += 2
            continue
        m = _IDENT.match(text, i)
        if m:
            word = m.group()
            if word == "_":
                kind = "WILD"
            elif word in KEYWORDS:
                kind = word
            elif word[0].isupper():
                kind = "FVAR"
            elif _TERM_VAR.match(word):
                kind = "VAR"
            else:
                kind = "ATOM"
            tokens.append(Token(kind, word, line, col))
            col += len(word)
            i = m.end()
            continue
        m = _INT.match(text, i)
        if m:
            tokens.append(Token("INT", m.group(), line, col))
            col += len(m.group())
            i = m.end()
            continue
        if ch in _ONE_CHAR:
            tokens.append(Token(ch, ch, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unknown token {ch!r}", line, col)
    tokens.append(Token("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise self.error(f"expected {kind!r}, found {tok.text!r}")
        return self.next()

    def error(self, message: str) -> ParseError:
        tok = self.peek()
        shown = tok.text if tok.kind != "EOF" else "end of input"
        return ParseError(message.replace("%s", repr(shown)), tok.line, tok.col)

    # -- formulas ----------------------------------------------------------

    def formula(self) -> Formula:
        left = self.prefix()
        if self.peek().kind == "&":
            self.next()
            return Conj((left, self.formula()))  # binary, right-associative
        return left

    def prefix(self) -> Formula:
        tok = self.peek()
        if tok.kind == "[":
            self.next()
            action = self.action()
            self.expect("]")
            return Nec(action, self.prefix())
        if tok.kind == "max":
            self.next()
            name = self.expect("FVAR").text
            self.expect(".")
            return Max(name, self.formula())
        if tok.kind == "if":
            self.next()
            test = self.boolexpr()
            self.expect("then")
            then_branch = self.formula()
            self.expect("else")
            return Cond(test, then_branch, self.formula())
        return self.primary()

    def primary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "tt":
            self.next()
            return TT
        if tok.kind == "ff":
            self.next()
            return FF
        if tok.kind == "FVAR":
            self.next()
            return FVar(tok.text)
        if tok.kind == "(":
            self.next()
            inner = self.formula()
            self.expect(")")
            return inner
        raise self.error("expected a formula, found %s")

    # -- actions and patterns ----------------------------------------------

    def action(self) -> ActionPattern:
        target = self.pattern()
        tok = self.peek()
        if tok.kind not in ("!", "?"):
            raise self.error("expected '!' or '?' in action, found %s")
        self.next()
        payload = self.pattern()
        return ActionPattern(tok.kind, target, payload)

    def pattern(self):
        tok = self.peek()
        if tok.kind == "VAR":
            self.next()
            return PVar(tok.text)
        if tok.kind == "WILD":
            self.next()
            return WILD
        if tok.kind == "INT":
            self.next()
            return PLit(Int(int(tok.text)))
        if tok.kind == "ATOM":
            self.next()
            return PLit(Atom(tok.text))
        if tok.kind == "{":
            self.next()
            items = [self.pattern()]
            while self.peek().kind == ",":
                self.next()
                items.append(self.pattern())
            self.expect("}")
            return PTup(tuple(items))
        raise self.error("expected a pattern, found %s")

    # -- boolean expressions -------------------------------------------------

    def boolexpr(self):
        left = self.band()
        while self.peek().kind == "or":
            self.next()
            left = BOr(left, self.band())
        return left

    def band(self):
        left = self.bnot()
        while self.peek().kind == "and":
            self.next()
            left = BAnd(left, self.bnot())
        return left

    def bnot(self):
        if self.peek().kind == "not":
            self.next()
            return BNot(self.bnot())
        return self.bcmp()

    def bcmp(self):
        if self.peek().kind == "(":
            self.next()
            inner = self.boolexpr()
            self.expect(")")
            return inner
        lhs = self.arith()
        tok = self.peek()
        if tok.kind not in ("==", "!=", "<", "<=", ">", ">="):
            raise self.error("expected a comparison operator, found %s")
        self.next()
        return Cmp(tok.kind, lhs, self.arith())

    def arith(self):
        left = self.operand()
        while self.peek().kind in ("+", "-", "*"):
            op = self.next().kind
            left = ABin(op, left, self.operand())
        return left

    def operand(self):
        tok = self.peek()
        if tok.kind == "VAR":
            self.next()
            return AVar(tok.text)
        if tok.kind == "INT":
            self.next()
            return ALit(Int(int(tok.text)))
        if tok.kind == "ATOM":
            self.next()
            return ALit(Atom(tok.text))
        raise self.error("expected a variable, integer, or atom, found %s")


def parse_formula(text: str) -> Formula:
    """Parse formula source into a raw AST (conjunction binary,
    right-associative; run check_wellformed before evaluating)."""
    parser = _Parser(tokenize(text))
    f = parser.formula()
    tok = parser.peek()
    if tok.kind != "EOF":
        raise parser.error("unexpected %s after formula")
    return f


def parse_event_line(text: str, index: int, line_no: int = 1) -> Event:
    """Parse a single closed trace-event line."""
    parser = _Parser(tokenize(text, first_line=line_no))
    action = parser.action()
    tok = parser.peek()
    if tok.kind != "EOF":
        raise parser.error("unexpected %s after event")
    for part, what in ((action.target, "target"), (action.payload, "payload")):
        if not pattern_is_closed(part):
            raise ParseError(
                f"events must be closed; variable or wildcard in {what}", line_no, 1
            )
    return Event(action.direction, pattern_to_value(action.target),
                 pattern_to_value(action.payload), index)


def parse_trace(text: str) -> list:
    """Parse a trace file: one event per line, '#' comments and blank
    lines skipped, events numbered 1..n in file order."""
    events = []
    index = 1
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        events.append(parse_event_line(stripped, index, line_no))
        index += 1
    return events
