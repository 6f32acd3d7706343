"""A small arithmetic-expression language for inline vector fields.

Supports +, -, *, /, ** (and the two-argument ``pow``), unary minus,
parentheses, numeric literals, named parameters, and the call set
exp/log/tanh/sin/cos.  Expressions are parsed once into a tree of frozen
dataclass nodes; evaluation broadcasts over numpy arrays, and every node
knows its symbolic derivative, so inline systems get exact Jacobians.

Variables are ``x1 .. xn`` (``x``/``y``/``z`` accepted as aliases for the
first three).  All node types are module-level classes, so parsed fields
pickle cleanly into worker processes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import ConfigError

__all__ = ["parse_expression", "ExpressionField", "FUNCTIONS"]

FUNCTIONS = {
    "exp": np.exp,
    "log": np.log,
    "tanh": np.tanh,
    "sin": np.sin,
    "cos": np.cos,
}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?"
    r"|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/(),]))"
)


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ConfigError(f"unexpected character {text[pos]!r} in expression")
        if m.lastgroup == "num":
            out.append(("num", float(m.group("num"))))
        elif m.lastgroup == "name":
            out.append(("name", m.group("name")))
        else:
            out.append(("op", m.group("op")))
        pos = m.end()
    out.append(("end", ""))
    return out


# --- node types -----------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float

    def eval(self, env):
        return self.value

    def diff(self, var):
        return Num(0.0)

    def __str__(self):
        return repr(self.value)


@dataclass(frozen=True)
class Var:
    name: str

    def eval(self, env):
        try:
            return env[self.name]
        except KeyError:
            raise ConfigError(f"unbound name {self.name!r} in expression")

    def diff(self, var):
        return Num(1.0 if var == self.name else 0.0)

    def __str__(self):
        return self.name


def _is_zero(n):
    return isinstance(n, Num) and n.value == 0.0


def _is_one(n):
    return isinstance(n, Num) and n.value == 1.0


def _add(a, b):
    if _is_zero(a):
        return b
    if _is_zero(b):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    return Add(a, b)


def _sub(a, b):
    if _is_zero(b):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    if _is_zero(a):
        return Neg(b)
    return Sub(a, b)


def _mul(a, b):
    if _is_zero(a) or _is_zero(b):
        return Num(0.0)
    if _is_one(a):
        return b
    if _is_one(b):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    return Mul(a, b)


def _div(a, b):
    if _is_zero(a):
        return Num(0.0)
    if _is_one(b):
        return a
    return Div(a, b)


@dataclass(frozen=True)
class Neg:
    a: object

    def eval(self, env):
        return -self.a.eval(env)

    def diff(self, var):
        return _sub(Num(0.0), self.a.diff(var))

    def __str__(self):
        return f"(-{self.a})"


@dataclass(frozen=True)
class Add:
    a: object
    b: object

    def eval(self, env):
        return self.a.eval(env) + self.b.eval(env)

    def diff(self, var):
        return _add(self.a.diff(var), self.b.diff(var))

    def __str__(self):
        return f"({self.a} + {self.b})"


@dataclass(frozen=True)
class Sub:
    a: object
    b: object

    def eval(self, env):
        return self.a.eval(env) - self.b.eval(env)

    def diff(self, var):
        return _sub(self.a.diff(var), self.b.diff(var))

    def __str__(self):
        return f"({self.a} - {self.b})"


@dataclass(frozen=True)
class Mul:
    a: object
    b: object

    def eval(self, env):
        return self.a.eval(env) * self.b.eval(env)

    def diff(self, var):
        return _add(
            _mul(self.a.diff(var), self.b), _mul(self.a, self.b.diff(var))
        )

    def __str__(self):
        return f"({self.a} * {self.b})"


@dataclass(frozen=True)
class Div:
    a: object
    b: object

    def eval(self, env):
        return self.a.eval(env) / self.b.eval(env)

    def diff(self, var):
        # (a/b)' = (a' b - a b') / b^2
        num = _sub(_mul(self.a.diff(var), self.b), _mul(self.a, self.b.diff(var)))
        return _div(num, Pow(self.b, Num(2.0)))

    def __str__(self):
        return f"({self.a} / {self.b})"


@dataclass(frozen=True)
class Pow:
    a: object
    b: object

    def eval(self, env):
        return self.a.eval(env) ** self.b.eval(env)

    def diff(self, var):
        if isinstance(self.b, Num):
            # d a^c = c a^(c-1) a'
            return _mul(
                _mul(self.b, Pow(self.a, Num(self.b.value - 1.0))),
                self.a.diff(var),
            )
        # general a^b = exp(b log a)
        return _mul(
            self,
            _add(
                _mul(self.b.diff(var), Call("log", (self.a,))),
                _mul(self.b, _div(self.a.diff(var), self.a)),
            ),
        )

    def __str__(self):
        return f"({self.a} ** {self.b})"


_DERIVS = {
    "exp": lambda a: Call("exp", (a,)),
    "log": lambda a: _div(Num(1.0), a),
    "tanh": lambda a: _sub(Num(1.0), Pow(Call("tanh", (a,)), Num(2.0))),
    "sin": lambda a: Call("cos", (a,)),
    "cos": lambda a: Neg(Call("sin", (a,))),
}


@dataclass(frozen=True)
class Call:
    fn: str
    args: Tuple[object, ...]

    def eval(self, env):
        vals = [a.eval(env) for a in self.args]
        if self.fn == "pow":
            return vals[0] ** vals[1]
        return FUNCTIONS[self.fn](*vals)

    def diff(self, var):
        if self.fn == "pow":
            return Pow(self.args[0], self.args[1]).diff(var)
        (a,) = self.args
        return _mul(_DERIVS[self.fn](a), a.diff(var))

    def __str__(self):
        return f"{self.fn}({', '.join(str(a) for a in self.args)})"


# --- parser ---------------------------------------------------------------


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, val=None):
        k, v = self.toks[self.i]
        if (kind is not None and k != kind) or (val is not None and v != val):
            raise ConfigError(f"expected {val or kind}, found {v!r}")
        self.i += 1
        return v

    def expr(self):
        node = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            op = self.take("op")
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            op = self.take("op")
            rhs = self.unary()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take("op")
            return Neg(self.unary())
        if self.peek() == ("op", "+"):
            self.take("op")
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "**"):
            self.take("op")
            return Pow(base, self.unary())  # right-associative
        return base

    def atom(self):
        kind, val = self.peek()
        if kind == "num":
            self.take("num")
            return Num(val)
        if kind == "name":
            self.take("name")
            if self.peek() == ("op", "("):
                if val != "pow" and val not in FUNCTIONS:
                    raise ConfigError(f"unknown function {val!r}")
                self.take("op", "(")
                args = [self.expr()]
                while self.peek() == ("op", ","):
                    self.take("op", ",")
                    args.append(self.expr())
                self.take("op", ")")
                want = 2 if val == "pow" else 1
                if len(args) != want:
                    raise ConfigError(f"{val} takes {want} argument(s)")
                return Call(val, tuple(args))
            return Var(val)
        if (kind, val) == ("op", "("):
            self.take("op", "(")
            node = self.expr()
            self.take("op", ")")
            return node
        raise ConfigError(f"unexpected token {val!r}")


def parse_expression(text: str):
    """Parse one expression string into an evaluable/differentiable tree."""
    p = _Parser(_tokenize(text))
    node = p.expr()
    if p.peek()[0] != "end":
        raise ConfigError(f"trailing input after expression: {p.peek()[1]!r}")
    return node


_ALIASES = {"x": "x1", "y": "x2", "z": "x3"}


def _substitute_params(node, params):
    """Fold parameter names into Num nodes (so pickled fields are closed)."""
    if isinstance(node, Var):
        name = _ALIASES.get(node.name, node.name)
        if name in params:
            return Num(float(params[name]))
        return Var(name)
    if isinstance(node, (Add, Sub, Mul, Div, Pow)):
        return type(node)(
            _substitute_params(node.a, params), _substitute_params(node.b, params)
        )
    if isinstance(node, Neg):
        return Neg(_substitute_params(node.a, params))
    if isinstance(node, Call):
        return Call(node.fn, tuple(_substitute_params(a, params) for a in node.args))
    return node


class ExpressionField:
    """A vector field defined by one expression per component.

    Evaluates with numpy broadcasting over (..., dim) inputs and provides
    the exact Jacobian from symbolic derivatives.  Instances are picklable
    (nodes are frozen dataclasses; parameters are folded in at build time).
    """

    def __init__(self, exprs, dim: int, params=None):
        params = dict(params or {})
        bad = set(params) & ({f"x{i+1}" for i in range(dim)} | set(_ALIASES))
        if bad:
            raise ConfigError(f"parameter names shadow variables: {sorted(bad)}")
        if len(exprs) != dim:
            raise ConfigError(f"expected {dim} component expressions, got {len(exprs)}")
        self.dim = dim
        self.components = tuple(
            _substitute_params(parse_expression(e), params) for e in exprs
        )
        self._jac = tuple(
            tuple(c.diff(f"x{j+1}") for j in range(dim)) for c in self.components
        )
        names = {f"x{i+1}" for i in range(dim)}
        for c in self.components:
            for name in _free_names(c):
                if name not in names:
                    raise ConfigError(f"unbound name {name!r} in field expression")

    def _env(self, y):
        y = np.asarray(y, dtype=float)
        return {f"x{i+1}": y[..., i] for i in range(self.dim)}, y

    def __call__(self, y):
        env, y = self._env(y)
        out = np.empty_like(y)
        for i, c in enumerate(self.components):
            out[..., i] = c.eval(env)
        return out

    def jacobian(self, y):
        env, y = self._env(y)
        if y.ndim != 1:
            raise ConfigError("jacobian expects a single point")
        j = np.empty((self.dim, self.dim))
        for i in range(self.dim):
            for k in range(self.dim):
                j[i, k] = self._jac[i][k].eval(env)
        return j


def _free_names(node):
    if isinstance(node, Var):
        yield node.name
    elif isinstance(node, (Add, Sub, Mul, Div, Pow)):
        yield from _free_names(node.a)
        yield from _free_names(node.b)
    elif isinstance(node, Neg):
        yield from _free_names(node.a)
    elif isinstance(node, Call):
        for a in node.args:
            yield from _free_names(a)
