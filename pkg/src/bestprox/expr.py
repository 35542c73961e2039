"""Arithmetic expressions for proximity functions and mappings.

Expressions are parsed once into an immutable tree and evaluated either on
scalar bindings (``evaluate``) or on broadcastable numpy arrays
(``evaluate_array``).  The grammar is documented in ``docs/grammar.md``.

Operator precedence, loosest to tightest::

    + -        left associative
    * /        left associative
    ^          right associative
    unary -    binds tighter than ^, so -x^2 == (-x)^2
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

FUNCTIONS = {"abs": 1, "min": 2, "max": 2}


class ExprError(Exception):
    """Base class for expression failures."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int, source: str = ""):
        self.offset = offset
        self.source = source
        super().__init__(f"{message} at offset {offset}")


class UnboundVariableError(ExprError):
    def __init__(self, names):
        self.names = sorted(names)
        super().__init__("unbound variable(s): " + ", ".join(self.names))


class EvalError(ExprError):
    pass


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple


Node = Union[Num, Var, Neg, BinOp, Call]


@dataclass(frozen=True)
class Expression:
    """A parsed expression; ``source`` is the text it came from."""

    root: Node
    source: str

    def __call__(self, **bindings: float) -> float:
        return evaluate(self, bindings)

    def __str__(self) -> str:
        return to_source(self.root)

    @property
    def variables(self) -> frozenset:
        return free_vars(self)


# ---------------------------------------------------------------- tokenizer

_NUM, _NAME, _OP, _END = "num", "name", "op", "end"


def _tokenize(source: str) -> list:
    tokens = []
    i, n = 0, len(source)
    while i < n:
        c = source[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and source[i + 1].isdigit()):
            start = i
            while i < n and source[i].isdigit():
                i += 1
            if i < n and source[i] == ".":
                i += 1
                while i < n and source[i].isdigit():
                    i += 1
            if i < n and source[i] in "eE":
                j = i + 1
                if j < n and source[j] in "+-":
                    j += 1
                if j < n and source[j].isdigit():
                    i = j
                    while i < n and source[i].isdigit():
                        i += 1
            text = source[start:i]
            # "2a1" has no operator between the number and the name
            if i < n and (source[i].isalpha() or source[i] == "_"):
                raise ExprSyntaxError("implicit multiplication is not allowed", i, source)
            tokens.append((_NUM, text, start))
            continue
        if c.isalpha() or c == "_":
            start = i
            while i < n and (source[i].isalnum() or source[i] == "_"):
                i += 1
            tokens.append((_NAME, source[start:i], start))
            continue
        if c in "+-*/^(),":
            tokens.append((_OP, c, i))
            i += 1
            continue
        raise ExprSyntaxError(f"unexpected character {c!r}", i, source)
    tokens.append((_END, "", n))
    return tokens


# ------------------------------------------------------------------- parser


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str):
        kind, value, offset = self.advance()
        if kind != _OP or value != text:
            shown = value or "end of input"
            raise ExprSyntaxError(f"expected {text!r}, found {shown!r}", offset, self.source)

    def error(self, message: str):
        raise ExprSyntaxError(message, self.peek()[2], self.source)

    def parse(self) -> Node:
        node = self.additive()
        kind, value, offset = self.peek()
        if kind != _END:
            raise ExprSyntaxError(f"unexpected trailing input {value!r}", offset, self.source)
        return node

    def additive(self) -> Node:
        node = self.multiplicative()
        while True:
            kind, value, _ = self.peek()
            if kind == _OP and value in "+-":
                self.advance()
                node = BinOp(value, node, self.multiplicative())
            else:
                return node

    def multiplicative(self) -> Node:
        node = self.power()
        while True:
            kind, value, _ = self.peek()
            if kind == _OP and value in "*/":
                self.advance()
                node = BinOp(value, node, self.power())
            else:
                return node

    def power(self) -> Node:
        base = self.unary()
        kind, value, _ = self.peek()
        if kind == _OP and value == "^":
            self.advance()
            return BinOp("^", base, self.power())
        return base

    def unary(self) -> Node:
        kind, value, _ = self.peek()
        if kind == _OP and value == "-":
            self.advance()
            return Neg(self.unary())
        return self.atom()

    def atom(self) -> Node:
        kind, value, offset = self.advance()
        if kind == _NUM:
            number = float(value)
            if not math.isfinite(number):
                raise ExprSyntaxError(f"literal {value!r} is not finite", offset, self.source)
            return Num(number)
        if kind == _NAME:
            nxt = self.peek()
            if nxt[0] == _OP and nxt[1] == "(":
                return self.call(value, offset)
            return Var(value)
        if kind == _OP and value == "(":
            node = self.additive()
            self.expect(")")
            return node
        shown = value or "end of input"
        raise ExprSyntaxError(f"unexpected {shown!r}", offset, self.source)

    def call(self, name: str, offset: int) -> Node:
        if name not in FUNCTIONS:
            raise ExprSyntaxError(f"unknown function {name!r}", offset, self.source)
        self.expect("(")
        args = [self.additive()]
        while self.peek()[0] == _OP and self.peek()[1] == ",":
            self.advance()
            args.append(self.additive())
        self.expect(")")
        if len(args) != FUNCTIONS[name]:
            raise ExprSyntaxError(
                f"{name}() takes {FUNCTIONS[name]} argument(s), got {len(args)}", offset, self.source
            )
        return Call(name, tuple(args))


def parse(source: str) -> Expression:
    """Parse ``source`` into an :class:`Expression`.

    Raises :class:`ExprSyntaxError` carrying the character offset of the
    first problem, including unknown function names.
    """
    if not isinstance(source, str) or not source.strip():
        raise ExprSyntaxError("empty expression", 0, source if isinstance(source, str) else "")
    return Expression(_Parser(source).parse(), source)


# -------------------------------------------------------------- inspection


def free_vars(expr) -> frozenset:
    node = expr.root if isinstance(expr, Expression) else expr
    names = set()
    stack = [node]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            names.add(node.name)
        elif isinstance(node, Neg):
            stack.append(node.operand)
        elif isinstance(node, BinOp):
            stack.extend((node.left, node.right))
        elif isinstance(node, Call):
            stack.extend(node.args)
    return frozenset(names)


def check_bound(expr: Expression, allowed) -> None:
    """Raise :class:`UnboundVariableError` if ``expr`` uses a name outside ``allowed``."""
    missing = free_vars(expr) - set(allowed)
    if missing:
        raise UnboundVariableError(missing)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}
_UNARY_PREC = 4


def _format_number(value: float) -> str:
    text = repr(float(value))
    if value < 0:
        return f"({text})"
    return text


def to_source(node: Node, parent_prec: int = 0) -> str:
    """Render ``node`` with the minimal parentheses needed to re-parse it."""
    if isinstance(node, Num):
        return _format_number(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({', '.join(to_source(a) for a in node.args)})"
    if isinstance(node, Neg):
        inner = node.operand
        # a negative literal prints as "(-x)", which would re-parse as Neg(Neg)
        text = "-" + to_source(inner, _UNARY_PREC)
        return f"({text})" if parent_prec > _UNARY_PREC else text
    prec = _PREC[node.op]
    if node.op == "^":
        left = to_source(node.left, _UNARY_PREC + 1)
        right = to_source(node.right, prec)
    else:
        left = to_source(node.left, prec)
        right = to_source(node.right, prec + 1)
    text = f"{left} {node.op} {right}"
    return f"({text})" if prec < parent_prec else text


# -------------------------------------------------------------- evaluation


def _scalar(node: Node, env: Mapping[str, float]) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        try:
            return float(env[node.name])
        except KeyError:
            raise UnboundVariableError([node.name]) from None
    if isinstance(node, Neg):
        return -_scalar(node.operand, env)
    if isinstance(node, Call):
        args = [_scalar(a, env) for a in node.args]
        if node.func == "abs":
            return abs(args[0])
        if node.func == "min":
            return min(args[0], args[1])
        return max(args[0], args[1])
    left = _scalar(node.left, env)
    right = _scalar(node.right, env)
    op = node.op
    if op == "+":
        return left + right
    if op == "-":
        return left - right
    if op == "*":
        return left * right
    if op == "/":
        if right == 0.0:
            raise EvalError("division by zero")
        return left / right
    if left == 0.0 and right < 0.0:
        raise EvalError("zero raised to a negative power")
    try:
        return math.pow(left, right)
    except (ValueError, OverflowError) as exc:
        raise EvalError(f"invalid power {left!r}^{right!r}") from exc


def evaluate(expr: Expression, bindings: Mapping[str, float]) -> float:
    """Evaluate on scalar bindings; non-finite results raise :class:`EvalError`."""
    missing = free_vars(expr) - set(bindings)
    if missing:
        raise UnboundVariableError(missing)
    value = _scalar(expr.root, bindings)
    if not math.isfinite(value):
        raise EvalError(f"non-finite result {value!r}")
    return value


def _array(node: Node, env):
    if isinstance(node, Num):
        return np.float64(node.value)
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise UnboundVariableError([node.name]) from None
    if isinstance(node, Neg):
        return np.negative(_array(node.operand, env))
    if isinstance(node, Call):
        args = [_array(a, env) for a in node.args]
        if node.func == "abs":
            return np.abs(args[0])
        if node.func == "min":
            return np.minimum(args[0], args[1])
        return np.maximum(args[0], args[1])
    left = _array(node.left, env)
    right = _array(node.right, env)
    op = node.op
    if op == "+":
        return np.add(left, right)
    if op == "-":
        return np.subtract(left, right)
    if op == "*":
        return np.multiply(left, right)
    if op == "/":
        if np.any(np.asarray(right) == 0.0):
            raise EvalError("division by zero")
        return np.divide(left, right)
    if np.any((np.asarray(left) == 0.0) & (np.asarray(right) < 0.0)):
        raise EvalError("zero raised to a negative power")
    return np.power(left, right)


def evaluate_array(expr: Expression, bindings: Mapping[str, np.ndarray], shape=None) -> np.ndarray:
    """Vectorised evaluation over broadcastable float arrays.

    The result is broadcast to ``shape`` when given (constant expressions
    otherwise come back 0-d).
    """
    missing = free_vars(expr) - set(bindings)
    if missing:
        raise UnboundVariableError(missing)
    with np.errstate(all="ignore"):
        value = np.asarray(_array(expr.root, bindings), dtype=np.float64)
    if shape is not None:
        value = np.broadcast_to(value, shape)
    if not np.all(np.isfinite(value)):
        raise EvalError("non-finite result")
    return value
