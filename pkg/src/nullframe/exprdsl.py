"""Embedding-coordinate expressions: parsing, printing and second-order jets.

Grammar (ASCII)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' intexp)*
    intexp := ['-'] INT | '(' ['-'] INT ')'
    atom   := NUMBER | FUNC '(' expr ')' | NAME | PARAM | '(' expr ')'

``PARAM`` is ``t1`` .. ``tm``; ``NAME`` is ``pi`` or ``sigma`` (the positive
root of x^2 - 3x - 1); ``FUNC`` is one of sin, cos, sinh, cosh, sqrt.
``**`` is accepted as a spelling of ``^``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

SIGMA = (3.0 + math.sqrt(13.0)) / 2.0

NAMED_CONSTANTS = {"pi": math.pi, "sigma": SIGMA}
FUNCTIONS = ("sin", "cos", "sinh", "cosh", "sqrt")


class ExpressionError(ValueError):
    """Base class for expression parsing and evaluation failures."""


class ExpressionSyntaxError(ExpressionError):
    def __init__(self, pos: int, message: str, text: str = ""):
        self.pos = pos
        self.message = message
        self.text = text
        super().__init__(f"at position {pos}: {message}")


class UnknownIdentifier(ExpressionError):
    def __init__(self, name: str, pos: int):
        self.name = name
        self.pos = pos
        super().__init__(f"unknown identifier {name!r} at position {pos}")


class ParamOutOfRange(ExpressionError):
    def __init__(self, index: int, param_count: int, pos: int):
        self.index = index
        self.param_count = param_count
        self.pos = pos
        super().__init__(
            f"parameter t{index} at position {pos} exceeds declared count {param_count}"
        )


class DomainError(ExpressionError):
    pass


class NonFiniteError(ExpressionError):
    pass


# ---------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Named:
    name: str


@dataclass(frozen=True)
class Param:
    index: int  # zero based


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" or a function name
    arg: "Node"


@dataclass(frozen=True)
class Binary:
    op: str  # one of + - * /
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


Node = Union[Const, Named, Param, Unary, Binary, Pow]


@dataclass(frozen=True)
class ExprAst:
    """A parsed expression together with the parameter count it was parsed against."""

    root: Node
    param_count: int
    source: str = field(default="", compare=False)

    def __str__(self) -> str:
        return pretty(self.root)


# ---------------------------------------------------------------------------
# tokenizer

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^()]))"
)


@dataclass
class _Tok:
    kind: str  # num, name, op, end
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    try:
        text.encode("ascii")
    except UnicodeEncodeError as exc:
        raise ExpressionSyntaxError(exc.start, "non-ASCII character", text) from None
    toks: list[_Tok] = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExpressionSyntaxError(bad, f"unexpected character {text[bad]!r}", text)
        kind = m.lastgroup
        start = m.start(kind)
        tok_text = m.group(kind)
        if kind == "op" and tok_text == "**":
            tok_text = "^"
        toks.append(_Tok(kind, tok_text, start))
        pos = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


_PARAM_RE = re.compile(r"t(\d+)$")


class _Parser:
    def __init__(self, text: str, param_count: int):
        self.text = text
        self.param_count = param_count
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, message: str, tok: _Tok | None = None) -> ExpressionSyntaxError:
        tok = tok or self.tok
        return ExpressionSyntaxError(tok.pos, message, self.text)

    def accept(self, op: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == op:
            self.i += 1
            return True
        return False

    def expect(self, op: str) -> None:
        if not self.accept(op):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {op!r}, found {found!r}")

    def parse(self) -> Node:
        if self.tok.kind == "end":
            raise self.error("empty expression")
        node = self.expr()
        if self.tok.kind != "end":
            raise self.error(f"unexpected token {self.tok.text!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.accept("-"):
            return Unary("neg", self.unary())
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> Node:
        node = self.atom()
        while self.accept("^"):
            node = Pow(node, self.int_exponent())
        return node

    def int_exponent(self) -> int:
        paren = self.accept("(")
        sign = -1 if self.accept("-") else 1
        tok = self.tok
        if tok.kind != "num" or not tok.text.isdigit():
            raise self.error("exponent must be an integer literal")
        self.i += 1
        if paren:
            self.expect(")")
        return sign * int(tok.text)

    def atom(self) -> Node:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Const(float(tok.text))
        if tok.kind == "name":
            self.i += 1
            name = tok.text
            if name in FUNCTIONS:
                if not (self.tok.kind == "op" and self.tok.text == "("):
                    raise self.error(f"function {name!r} requires parentheses")
                self.i += 1
                arg = self.expr()
                self.expect(")")
                return Unary(name, arg)
            if name in NAMED_CONSTANTS:
                return Named(name)
            m = _PARAM_RE.match(name)
            if m:
                index = int(m.group(1))
                if index < 1 or index > self.param_count:
                    raise ParamOutOfRange(index, self.param_count, tok.pos)
                return Param(index - 1)
            raise UnknownIdentifier(name, tok.pos)
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        found = tok.text or "end of input"
        raise self.error(f"unexpected {found!r}")


def parse_expression(text: str, param_count: int) -> ExprAst:
    """Parse ``text`` as a formula over ``t1 .. t{param_count}``."""
    if param_count < 0:
        raise ValueError("param_count must be non-negative")
    root = _Parser(text, param_count).parse()
    return ExprAst(root, param_count, text)


# ---------------------------------------------------------------------------
# printing

def pretty(node: Node) -> str:
    """Fully parenthesised rendering; re-parsing it gives an identical tree."""
    if isinstance(node, ExprAst):
        node = node.root
    if isinstance(node, Const):
        return repr(float(node.value))
    if isinstance(node, Named):
        return node.name
    if isinstance(node, Param):
        return f"t{node.index + 1}"
    if isinstance(node, Unary):
        if node.op == "neg":
            return f"-({pretty(node.arg)})"
        return f"{node.op}({pretty(node.arg)})"
    if isinstance(node, Binary):
        return f"({pretty(node.left)} {node.op} {pretty(node.right)})"
    if isinstance(node, Pow):
        exp = str(node.exponent) if node.exponent >= 0 else f"({node.exponent})"
        return f"({pretty(node.base)})^{exp}"
    raise TypeError(f"not an expression node: {node!r}")


def referenced_params(node: Node) -> set[int]:
    if isinstance(node, ExprAst):
        node = node.root
    if isinstance(node, Param):
        return {node.index}
    if isinstance(node, Unary):
        return referenced_params(node.arg)
    if isinstance(node, Binary):
        return referenced_params(node.left) | referenced_params(node.right)
    if isinstance(node, Pow):
        return referenced_params(node.base)
    return set()


# ---------------------------------------------------------------------------
# evaluation

@dataclass(frozen=True)
class Jet2:
    """Value, gradient and (symmetric) Hessian of a scalar at a point."""

    value: float
    grad: np.ndarray
    hess: np.ndarray

    @classmethod
    def constant(cls, value: float, m: int) -> "Jet2":
        return cls(float(value), np.zeros(m), np.zeros((m, m)))

    @classmethod
    def variable(cls, value: float, index: int, m: int) -> "Jet2":
        g = np.zeros(m)
        g[index] = 1.0
        return cls(float(value), g, np.zeros((m, m)))


# (f, f', f'') for the unary functions
_UNARY: dict[str, Callable[[float], tuple[float, float, float]]] = {
    "sin": lambda x: (math.sin(x), math.cos(x), -math.sin(x)),
    "cos": lambda x: (math.cos(x), -math.sin(x), -math.cos(x)),
    "sinh": lambda x: (math.sinh(x), math.cosh(x), math.sinh(x)),
    "cosh": lambda x: (math.cosh(x), math.sinh(x), math.cosh(x)),
}


def _chain(a: Jet2, f0: float, f1: float, f2: float) -> Jet2:
    return Jet2(f0, f1 * a.grad, f1 * a.hess + f2 * np.outer(a.grad, a.grad))


def _sqrt(a: Jet2) -> Jet2:
    if a.value < 0.0:
        raise DomainError(f"sqrt of negative value {a.value!r}")
    r = math.sqrt(a.value)
    if r == 0.0:
        if np.any(a.grad) or np.any(a.hess):
            raise NonFiniteError("derivative of sqrt at 0")
        return Jet2(0.0, a.grad.copy(), a.hess.copy())
    return _chain(a, r, 0.5 / r, -0.25 / (r * a.value))


def _mul(a: Jet2, b: Jet2) -> Jet2:
    cross = np.outer(a.grad, b.grad)
    return Jet2(
        a.value * b.value,
        a.value * b.grad + b.value * a.grad,
        a.value * b.hess + b.value * a.hess + cross + cross.T,
    )


def _recip(b: Jet2) -> Jet2:
    if b.value == 0.0:
        raise DomainError("division by zero")
    v = 1.0 / b.value
    return _chain(b, v, -v * v, 2.0 * v * v * v)


def _pow(a: Jet2, n: int) -> Jet2:
    if n == 0:
        return Jet2.constant(1.0, a.grad.size)
    x = a.value
    if x == 0.0 and n < 0:
        raise DomainError("zero raised to a negative power")
    f0 = x**n
    f1 = n * x ** (n - 1) if n != 1 else 1.0
    f2 = n * (n - 1) * x ** (n - 2) if n not in (1, 2) else float(n * (n - 1))
    return _chain(a, f0, f1, f2)


def _jet(node: Node, t: np.ndarray) -> Jet2:
    m = t.size
    if isinstance(node, Const):
        return Jet2.constant(node.value, m)
    if isinstance(node, Named):
        return Jet2.constant(NAMED_CONSTANTS[node.name], m)
    if isinstance(node, Param):
        return Jet2.variable(t[node.index], node.index, m)
    if isinstance(node, Unary):
        a = _jet(node.arg, t)
        if node.op == "neg":
            return Jet2(-a.value, -a.grad, -a.hess)
        if node.op == "sqrt":
            return _sqrt(a)
        return _chain(a, *_UNARY[node.op](a.value))
    if isinstance(node, Binary):
        a = _jet(node.left, t)
        b = _jet(node.right, t)
        if node.op == "+":
            return Jet2(a.value + b.value, a.grad + b.grad, a.hess + b.hess)
        if node.op == "-":
            return Jet2(a.value - b.value, a.grad - b.grad, a.hess - b.hess)
        if node.op == "*":
            return _mul(a, b)
        return _mul(a, _recip(b))
    if isinstance(node, Pow):
        return _pow(_jet(node.base, t), node.exponent)
    raise TypeError(f"not an expression node: {node!r}")


def _as_point(ast: ExprAst, t) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.ndim != 1 or t.size != ast.param_count:
        raise ValueError(f"expected {ast.param_count} parameter values, got shape {t.shape}")
    return t


def eval_jet2(ast: ExprAst, t) -> Jet2:
    """Exact value, gradient and Hessian of ``ast`` at ``t``."""
    t = _as_point(ast, t)
    try:
        jet = _jet(ast.root, t)
    except (OverflowError, ZeroDivisionError) as exc:
        raise NonFiniteError(str(exc)) from None
    if not (math.isfinite(jet.value) and np.all(np.isfinite(jet.grad)) and np.all(np.isfinite(jet.hess))):
        raise NonFiniteError(f"non-finite jet for {pretty(ast.root)} at {t.tolist()}")
    hess = 0.5 * (jet.hess + jet.hess.T)
    return Jet2(jet.value, jet.grad, hess)


def _value(node: Node, t: np.ndarray) -> float:
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Named):
        return NAMED_CONSTANTS[node.name]
    if isinstance(node, Param):
        return float(t[node.index])
    if isinstance(node, Unary):
        x = _value(node.arg, t)
        if node.op == "neg":
            return -x
        if node.op == "sqrt":
            if x < 0.0:
                raise DomainError(f"sqrt of negative value {x!r}")
            return math.sqrt(x)
        return _UNARY[node.op](x)[0]
    if isinstance(node, Binary):
        a = _value(node.left, t)
        b = _value(node.right, t)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if b == 0.0:
            raise DomainError("division by zero")
        return a / b
    if isinstance(node, Pow):
        x = _value(node.base, t)
        if x == 0.0 and node.exponent < 0:
            raise DomainError("zero raised to a negative power")
        return x**node.exponent
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(ast: ExprAst, t) -> float:
    """Value only; cheaper than :func:`eval_jet2`."""
    t = _as_point(ast, t)
    try:
        v = _value(ast.root, t)
    except (OverflowError, ZeroDivisionError) as exc:
        raise NonFiniteError(str(exc)) from None
    if not math.isfinite(v):
        raise NonFiniteError(f"non-finite value for {pretty(ast.root)} at {t.tolist()}")
    return v


def eval_constant(text: str) -> float:
    """Evaluate a parameter-free expression such as ``3-sigma`` or ``1/sqrt(2)``."""
    return evaluate(parse_expression(text, 0), np.zeros(0))


def eval_vector_jets(asts, t) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stack jets of several expressions: values (n,), Jacobian (n, m), Hessians (n, m, m)."""
    jets = [eval_jet2(a, t) for a in asts]
    return (
        np.array([j.value for j in jets]),
        np.array([j.grad for j in jets]),
        np.array([j.hess for j in jets]),
    )


def eval_vector(asts, t) -> np.ndarray:
    return np.array([evaluate(a, t) for a in asts])
