"""Coefficient expression mini-language.

Grammar (evaluated in double precision)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := number | 'x' | 'y' | 'pi' | func '(' expr ')' | '(' expr ')' | '-' factor
    func   in {sin, cos, exp, abs}

Parse errors carry the 1-based column of the offending token.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ExpressionError

__all__ = ["parse_expression", "Expression", "Num", "Var", "Pi", "Neg", "BinOp", "Func"]

_FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "abs": np.abs}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/()]))"
)


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # 'x' or 'y'


@dataclass(frozen=True)
class Pi:
    pass


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Func:
    name: str
    arg: object


class Expression:
    """A parsed coefficient expression.

    ``evaluate`` is vectorized over numpy arrays for the variables; ``uses``
    lists the variables actually referenced so 1D geometries can reject
    expressions in ``y``.
    """

    def __init__(self, ast, text):
        self.ast = ast
        self.text = text

    def __repr__(self):
        return f"Expression({self.text!r})"

    def uses(self):
        found = set()

        def walk(node):
            if isinstance(node, Var):
                found.add(node.name)
            elif isinstance(node, Neg):
                walk(node.operand)
            elif isinstance(node, BinOp):
                walk(node.left)
                walk(node.right)
            elif isinstance(node, Func):
                walk(node.arg)

        walk(self.ast)
        return found

    def function_nodes(self):
        count = 0

        def walk(node):
            nonlocal count
            if isinstance(node, Func):
                count += 1
                walk(node.arg)
            elif isinstance(node, Neg):
                walk(node.operand)
            elif isinstance(node, BinOp):
                walk(node.left)
                walk(node.right)

        walk(self.ast)
        return count

    def evaluate(self, x, y=None):
        x = np.asarray(x, dtype=float)
        yv = None if y is None else np.asarray(y, dtype=float)

        def ev(node):
            if isinstance(node, Num):
                return np.float64(node.value)
            if isinstance(node, Pi):
                return np.float64(np.pi)
            if isinstance(node, Var):
                if node.name == "x":
                    return x
                if yv is None:
                    raise ExpressionError("expression uses 'y' on a 1D geometry", 1)
                return yv
            if isinstance(node, Neg):
                return -ev(node.operand)
            if isinstance(node, Func):
                return _FUNCS[node.name](ev(node.arg))
            if isinstance(node, BinOp):
                left, right = ev(node.left), ev(node.right)
                if node.op == "+":
                    return left + right
                if node.op == "-":
                    return left - right
                if node.op == "*":
                    return left * right
                return left / right
            raise AssertionError(f"unknown node {node!r}")

        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = ev(self.ast)
        return np.broadcast_to(np.asarray(out, dtype=float), x.shape).copy()


class _Tokens:
    def __init__(self, text):
        self.text = text
        self.items = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None or m.end() == pos:
                # skip leading whitespace manually to report the right column
                stripped = pos
                while stripped < len(text) and text[stripped].isspace():
                    stripped += 1
                if stripped == len(text):
                    break
                raise ExpressionError(
                    f"unexpected character {text[stripped]!r}", stripped + 1
                )
            kind = m.lastgroup
            value = m.group(kind)
            column = m.start(kind) + 1
            self.items.append((kind, value, column))
            pos = m.end()
        self.pos = 0

    def peek(self):
        if self.pos < len(self.items):
            return self.items[self.pos]
        return ("end", "", len(self.text) + 1)

    def next(self):
        tok = self.peek()
        self.pos += 1
        return tok


def _parse_expr(tokens):
    node = _parse_term(tokens)
    while True:
        kind, value, _ = tokens.peek()
        if kind == "op" and value in "+-":
            tokens.next()
            node = BinOp(value, node, _parse_term(tokens))
        else:
            return node


def _parse_term(tokens):
    node = _parse_factor(tokens)
    while True:
        kind, value, _ = tokens.peek()
        if kind == "op" and value in "*/":
            tokens.next()
            node = BinOp(value, node, _parse_factor(tokens))
        else:
            return node


def _parse_factor(tokens):
    kind, value, column = tokens.next()
    if kind == "number":
        return Num(float(value))
    if kind == "name":
        if value == "pi":
            return Pi()
        if value in ("x", "y"):
            return Var(value)
        if value in _FUNCS:
            k2, v2, c2 = tokens.next()
            if not (k2 == "op" and v2 == "("):
                raise ExpressionError(f"expected '(' after {value!r}", c2)
            arg = _parse_expr(tokens)
            k3, v3, c3 = tokens.next()
            if not (k3 == "op" and v3 == ")"):
                raise ExpressionError("expected ')'", c3)
            return Func(value, arg)
        raise ExpressionError(f"unknown name {value!r}", column)
    if kind == "op" and value == "(":
        node = _parse_expr(tokens)
        k2, v2, c2 = tokens.next()
        if not (k2 == "op" and v2 == ")"):
            raise ExpressionError("expected ')'", c2)
        return node
    if kind == "op" and value == "-":
        return Neg(_parse_factor(tokens))
    if kind == "end":
        raise ExpressionError("unexpected end of expression", column)
    raise ExpressionError(f"unexpected token {value!r}", column)


def parse_expression(text: str) -> Expression:
    """Parse ``text`` against the coefficient grammar.

    Raises :class:`ExpressionError` with the 1-based column on syntax errors.
    """
    tokens = _Tokens(text)
    node = _parse_expr(tokens)
    kind, value, column = tokens.peek()
    if kind != "end":
        raise ExpressionError(f"trailing input {value!r}", column)
    return Expression(node, text)
