"""Recursive-descent parser for the small g-expression language.

Grammar (whitespace ignored)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | factor
    factor := base ('^' UINT)?
    base   := NUMBER | 'x' | '(' expr ')'

Unary minus binds looser than ``^`` so that ``-x^2`` means ``-(x^2)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Union

from .errors import EvaluationError, ParseError

_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_UINT = re.compile(r"\d+")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


Node = Union[Num, Var, Neg, BinOp, Pow]


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _peek(self) -> str:
        self._skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def _fail(self, message: str):
        raise ParseError(self.pos, message)

    def parse(self) -> Node:
        if not self.text.strip():
            raise ParseError(0, "empty expression")
        node = self.expr()
        if self._peek():
            self._fail(f"unexpected {self._peek()!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self._peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self._peek() in ("*", "/"):
            op = self.text[self.pos]
            self.pos += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self._peek() == "-":
            self.pos += 1
            return Neg(self.unary())
        return self.factor()

    def factor(self) -> Node:
        node = self.base()
        if self._peek() == "^":
            self.pos += 1
            self._skip()
            m = _UINT.match(self.text, self.pos)
            if m is None:
                self._fail("expected a nonnegative integer exponent after '^'")
            self.pos = m.end()
            node = Pow(node, int(m.group()))
        return node

    def base(self) -> Node:
        c = self._peek()
        if c == "":
            self._fail("unexpected end of expression")
        if c == "(":
            self.pos += 1
            node = self.expr()
            if self._peek() != ")":
                self._fail("expected ')'")
            self.pos += 1
            return node
        if c == "x":
            self.pos += 1
            if self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
                self._fail("unknown identifier; the only variable is x")
            return Var()
        if c.isalpha() or c == "_":
            self._fail(f"unknown identifier starting with {c!r}; the only variable is x")
        m = _NUMBER.match(self.text, self.pos)
        if m is None:
            self._fail(f"unexpected {c!r}")
        self.pos = m.end()
        return Num(float(m.group()))


def parse(text: str) -> Node:
    """Parse ``text`` into an expression tree, raising ParseError on bad input."""
    return _Parser(text).parse()


def to_text(node: Node) -> str:
    """Fully parenthesized text that re-parses to an equivalent tree."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Neg):
        return f"(-{to_text(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    return f"({to_text(node.base)})^{node.exponent}"


def _ipow(v: float, n: int) -> float:
    try:
        return v ** n
    except OverflowError:
        return math.copysign(math.inf, v) if n % 2 else math.inf


def compile_node(node: Node) -> Callable[[float], float]:
    """Turn a tree into a closure; much faster than re-walking it per call."""
    if isinstance(node, Num):
        c = node.value
        return lambda x: c
    if isinstance(node, Var):
        return lambda x: x
    if isinstance(node, Neg):
        inner = compile_node(node.operand)
        return lambda x: -inner(x)
    if isinstance(node, Pow):
        b, n = compile_node(node.base), node.exponent
        if n == 0:
            return lambda x: 1.0
        return lambda x: _ipow(b(x), n)
    left, right = compile_node(node.left), compile_node(node.right)
    if node.op == "+":
        return lambda x: left(x) + right(x)
    if node.op == "-":
        return lambda x: left(x) - right(x)
    if node.op == "*":
        return lambda x: left(x) * right(x)

    def divide(x: float) -> float:
        den = right(x)
        if den == 0.0:
            raise EvaluationError(f"division by zero at x={x!r}")
        return left(x) / den

    return divide
