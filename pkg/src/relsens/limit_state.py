"""Limit-state functions g(x); failure is g <= 0.

Evaluators are vectorized: they take an ``(n, m)`` array of physical-space
points and return ``n`` values. Calling a :class:`LimitState` with a single
``m``-vector returns a float.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    DomainError,
    EmptyCoefficients,
    EvaluationError,
    NonFiniteValue,
    ParseError,
    UnknownIdentifier,
)


@dataclass(frozen=True)
class LimitState:
    evaluator: Callable[[np.ndarray], np.ndarray]
    input_names: tuple
    coefficients: Optional[tuple] = None  # (a0, a) for linear forms
    description: str = field(default="", compare=False)
    strict_point: bool = field(default=False, compare=False)

    @property
    def dim(self):
        return len(self.input_names)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(f"expected {self.dim} inputs, got {x.shape[-1]}")
        if x.ndim == 1:
            value = float(self.evaluator(x[None, :])[0])
            if self.strict_point and not math.isfinite(value):
                raise EvaluationError(f"{self.description!r} evaluated to {value} at {x.tolist()}")
            return value
        return np.asarray(self.evaluator(x), dtype=float)


def indicator(g_value):
    """1 when g <= 0 (failure, boundary included), else 0."""
    g = float(g_value)
    if not math.isfinite(g):
        raise NonFiniteValue(f"limit-state value is not finite: {g_value!r}")
    return 1 if g <= 0.0 else 0


def failure_indicator(g):
    """Vectorized :func:`indicator`; returns a float array of 0/1."""
    g = np.asarray(g, dtype=float)
    if not np.all(np.isfinite(g)):
        raise NonFiniteValue("limit-state values are not all finite")
    return (g <= 0.0).astype(float)


def linear(a0, a, input_names=None):
    """g(x) = a0 + sum_i a_i x_i."""
    a = np.array(a, dtype=float).ravel()
    if a.size == 0:
        raise EmptyCoefficients("linear limit state needs at least one coefficient")
    a0 = float(a0)
    names = tuple(input_names) if input_names is not None else tuple(f"x{i + 1}" for i in range(a.size))
    if len(names) != a.size:
        raise ValueError("one input name per coefficient is required")

    def g(x):
        return a0 + x @ a

    return LimitState(g, names, (a0, tuple(a.tolist())), "linear")


def bearing_factors(phi_deg):
    """Terzaghi bearing-capacity factors (N_d0, N_b0, N_c0) for friction angle in degrees."""
    phi = np.radians(np.asarray(phi_deg, dtype=float))
    t = np.tan(phi)
    nd = np.tan(0.25 * np.pi + 0.5 * phi) ** 2 * np.exp(np.pi * t)
    nb = (nd - 1.0) * t
    with np.errstate(divide="ignore", invalid="ignore"):
        nc = (nd - 1.0) / t
    return nd, nb, nc


def bearing_resistance(phi_deg, cohesion, unit_weight, b, d):
    nd, nb, nc = bearing_factors(phi_deg)
    return b * (unit_weight * d * nd + unit_weight * b * nb + cohesion * nc)


def terzaghi_bearing(b, d, input_names=("N_load", "phi", "c", "gamma_s")):
    """Bearing failure of a strip footing of width ``b`` at depth ``d``.

    Inputs are (load, friction angle in degrees, cohesion, soil unit weight)
    and g = R_sp - load.
    """
    b, d = float(b), float(d)
    if not b > 0.0:
        raise DomainError("footing width must be positive")
    if d < 0.0:
        raise DomainError("footing depth must be non-negative")

    def g(x):
        load, phi, c, gamma = x[:, 0], x[:, 1], x[:, 2], x[:, 3]
        if np.any(phi <= 0.0):
            raise DomainError("friction angle must be positive (N_c0 is singular at 0)")
        return bearing_resistance(phi, c, gamma, b, d) - load

    return LimitState(g, tuple(input_names), None, f"terzaghi(b={b}, d={d})")


# --- expression language ----------------------------------------------------
#
#   expr   = term { ("+" | "-") term } ;
#   term   = unary { ("*" | "/") unary } ;
#   unary  = ("+" | "-") unary | power ;
#   power  = atom [ "^" unary ] ;
#   atom   = number | name | name "(" expr { "," expr } ")" | "(" expr ")" ;

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))"
)

FUNCTIONS = {
    "tan": (np.tan, 1),
    "exp": (np.exp, 1),
    "ln": (np.log, 1),
    "sqrt": (np.sqrt, 1),
    "abs": (np.abs, 1),
    "min": (None, -2),
    "max": (None, -2),
}
CONSTANTS = {"pi": math.pi}


def _tokenize(text):
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, names, constants):
        self.tokens = _tokenize(text)
        self.i = 0
        self.names = {n: k for k, n in enumerate(names)}
        self.constants = dict(CONSTANTS, **constants)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value or kind != "op":
            found = "end of input" if kind == "end" else repr(text)
            raise ParseError(f"expected {value!r}, found {found}", pos)

    def parse(self):
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {text!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = ("+" if op == "+" else "-", node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = (op, node, self.unary())
        return node

    def unary(self):
        kind, text, _ = self.peek()
        if kind == "op" and text in ("+", "-"):
            self.take()
            inner = self.unary()
            return ("neg", inner) if text == "-" else inner
        return self.power()

    def power(self):
        node = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.take()
            node = ("^", node, self.unary())
        return node

    def atom(self):
        kind, text, pos = self.take()
        if kind == "num":
            return ("const", float(text))
        if kind == "name":
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                return self.call(text, pos)
            if text in self.names:
                return ("var", self.names[text])
            if text in self.constants:
                return ("const", float(self.constants[text]))
            if text in FUNCTIONS:
                raise ParseError(f"function {text!r} needs an argument list", pos)
            raise UnknownIdentifier(text, pos)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ParseError(f"unexpected {found}", pos)

    def call(self, name, pos):
        if name not in FUNCTIONS:
            raise UnknownIdentifier(name, pos)
        self.expect("(")
        args = [self.expr()]
        while self.peek()[1] == "," and self.peek()[0] == "op":
            self.take()
            args.append(self.expr())
        self.expect(")")
        _, arity = FUNCTIONS[name]
        if arity > 0 and len(args) != arity:
            raise ParseError(f"{name}() takes {arity} argument(s), got {len(args)}", pos)
        if arity < 0 and len(args) < -arity:
            raise ParseError(f"{name}() takes at least {-arity} arguments, got {len(args)}", pos)
        return ("call", name, args)


def _compile(node):
    tag = node[0]
    if tag == "const":
        value = node[1]
        return lambda x: np.full(x.shape[0], value)
    if tag == "var":
        k = node[1]
        return lambda x: x[:, k]
    if tag == "neg":
        f = _compile(node[1])
        return lambda x: -f(x)
    if tag == "call":
        name, args = node[1], [_compile(a) for a in node[2]]
        if name == "min":
            return lambda x: np.minimum.reduce([a(x) for a in args])
        if name == "max":
            return lambda x: np.maximum.reduce([a(x) for a in args])
        fn = FUNCTIONS[name][0]
        a0 = args[0]
        return lambda x: fn(a0(x))
    lhs, rhs = _compile(node[1]), _compile(node[2])
    if tag == "+":
        return lambda x: lhs(x) + rhs(x)
    if tag == "-":
        return lambda x: lhs(x) - rhs(x)
    if tag == "*":
        return lambda x: lhs(x) * rhs(x)
    if tag == "/":
        return lambda x: lhs(x) / rhs(x)
    return lambda x: np.power(lhs(x), rhs(x))


def parse_expression(text, input_names: Sequence[str], constants=None):
    """Compile an arithmetic expression over ``input_names`` into a LimitState.

    Division by zero and domain faults yield NaN/inf in batch evaluation (the
    sampling layer reports the offending sample); a single-point call raises
    :class:`EvaluationError` instead.
    """
    names = tuple(input_names)
    if len(set(names)) != len(names):
        raise ValueError("input names must be unique")
    tree = _Parser(text, names, constants or {}).parse()
    fn = _compile(tree)

    def g(x):
        with np.errstate(all="ignore"):
            return fn(np.asarray(x, dtype=float))

    return LimitState(g, names, None, text, strict_point=True)
