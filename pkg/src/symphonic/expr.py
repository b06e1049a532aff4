"""Expression language for metric components, map components and scalar fields.

Grammar (whitespace insensitive)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := atom ("^" unary)?          # right-associative, binds above unary minus
    atom    := NUMBER | "pi" | VAR | NAME "(" expr ("," expr)* ")" | "(" expr ")"
    VAR     := x1, x2, ... up to the declared arity

Functions: sin cos tan exp log sqrt abs atan2 (atan2 takes two arguments).
No implicit multiplication: "2x1" is a syntax error.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Tuple, Union

from . import autodiff as ad
from .errors import (
    EvaluationDomainError,
    ExprEvaluationError,
    ExprNameError,
    ExprSyntaxError,
)

__all__ = ["Expression", "parse", "Const", "Var", "Unary", "Binary", "Call"]

FUNCTIONS = {
    "sin": (ad.sin, 1),
    "cos": (ad.cos, 1),
    "tan": (ad.tan, 1),
    "exp": (ad.exp, 1),
    "log": (ad.log, 1),
    "sqrt": (ad.sqrt, 1),
    "abs": (abs, 1),
    "atan2": (ad.atan2, 2),
}


@dataclass(frozen=True)
class Const:
    value: float
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Var:
    index: int  # 1-based, as written in the source
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Unary:
    op: str  # "neg"
    operand: "Node"
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Binary:
    op: str  # add sub mul div pow
    left: "Node"
    right: "Node"
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    fn: str
    args: Tuple["Node", ...]
    offset: int = field(default=0, compare=False)


Node = Union[Const, Var, Unary, Binary, Call]

_TOKEN = re.compile(
    r"""
    (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
  | (?P<ws>\s+)
    """,
    re.VERBOSE,
)

_VAR = re.compile(r"x([0-9]+)$")


def _tokenize(src):
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src, arity):
        self.src = src
        self.arity = arity
        self.tokens = _tokenize(src)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        self.i += 1

    def expect_op(self, op):
        kind, text, off = self.tok
        if kind != "op" or text != op:
            raise ExprSyntaxError(f"got {text!r}" if text else "unexpected end", off, {op})
        self.advance()

    def parse(self):
        node = self.expr()
        kind, text, off = self.tok
        if kind != "end":
            raise ExprSyntaxError(f"trailing input {text!r}", off, {"end of input"})
        return node

    def expr(self):
        node = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op, _, off = "add" if self.tok[1] == "+" else "sub", None, self.tok[2]
            self.advance()
            node = Binary(op, node, self.term(), off)
        return node

    def term(self):
        node = self.unary()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op, off = ("mul" if self.tok[1] == "*" else "div"), self.tok[2]
            self.advance()
            node = Binary(op, node, self.unary(), off)
        return node

    def unary(self):
        kind, text, off = self.tok
        if kind == "op" and text == "-":
            self.advance()
            return Unary("neg", self.unary(), off)
        return self.power()

    def power(self):
        node = self.atom()
        if self.tok[0] == "op" and self.tok[1] == "^":
            off = self.tok[2]
            self.advance()
            node = Binary("pow", node, self.unary(), off)
        return node

    def atom(self):
        kind, text, off = self.tok
        if kind == "num":
            self.advance()
            return Const(float(text), off)
        if kind == "name":
            self.advance()
            if text == "pi":
                return Const(math.pi, off)
            m = _VAR.match(text)
            if m:
                idx = int(m.group(1))
                if idx < 1 or idx > self.arity:
                    raise ExprNameError(
                        f"variable {text} out of range for arity {self.arity}", off
                    )
                return Var(idx, off)
            if text in FUNCTIONS:
                _, nargs = FUNCTIONS[text]
                self.expect_op("(")
                args = [self.expr()]
                while self.tok[0] == "op" and self.tok[1] == ",":
                    self.advance()
                    args.append(self.expr())
                self.expect_op(")")
                if len(args) != nargs:
                    raise ExprSyntaxError(
                        f"{text} expects {nargs} argument(s), got {len(args)}", off
                    )
                return Call(text, tuple(args), off)
            raise ExprNameError(f"unknown identifier {text!r}", off)
        if kind == "op" and text == "(":
            self.advance()
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExprSyntaxError(
            f"got {text!r}" if text else "unexpected end of input",
            off,
            {"number", "variable", "function", "("},
        )


def _eval(node, point):
    try:
        if isinstance(node, Const):
            return node.value
        if isinstance(node, Var):
            return point[node.index - 1]
        if isinstance(node, Unary):
            return -_eval(node.operand, point)
        if isinstance(node, Binary):
            a = _eval(node.left, point)
            b = _eval(node.right, point)
            if node.op == "add":
                return a + b
            if node.op == "sub":
                return a - b
            if node.op == "mul":
                return a * b
            if node.op == "div":
                return a / b
            return a ** b
        fn, _ = FUNCTIONS[node.fn]
        return fn(*(_eval(a, point) for a in node.args))
    except ZeroDivisionError:
        raise ExprEvaluationError("division by zero", node.offset) from None
    except OverflowError:
        raise ExprEvaluationError("overflow", node.offset) from None
    except EvaluationDomainError as e:
        raise ExprEvaluationError(str(e), node.offset) from None


def _pretty(node):
    # Fully parenthesized, so reparsing is trivially stable.
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Var):
        return f"x{node.index}"
    if isinstance(node, Unary):
        return f"(-{_pretty(node.operand)})"
    if isinstance(node, Binary):
        sym = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}[node.op]
        return f"({_pretty(node.left)} {sym} {_pretty(node.right)})"
    return f"{node.fn}({', '.join(_pretty(a) for a in node.args)})"


@dataclass(frozen=True)
class Expression:
    """A parsed expression in variables x1..x<arity>, callable on scalar-likes."""

    ast: Node
    arity: int
    source: str = field(default="", compare=False)

    def __call__(self, point):
        if len(point) != self.arity:
            raise ValueError(f"expected {self.arity} coordinates, got {len(point)}")
        return _eval(self.ast, point)

    def pretty(self):
        return _pretty(self.ast)


def parse(src, arity):
    """Parse ``src`` into an Expression over x1..x<arity>."""
    if arity < 0:
        raise ValueError("arity must be non-negative")
    ast = _Parser(src, arity).parse()
    return Expression(ast, arity, src)
