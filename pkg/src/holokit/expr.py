"""Rational holomorphic maps: parsing, evaluation and exact derivatives.

An expression is an immutable tree of nodes.  Evaluation is vectorised over
numpy arrays (one array per variable), and derivatives are obtained by
forward-mode differentiation on the same tree, so a Jacobian is exact up to
floating rounding.

Map grammar::

    map     := expr (',' expr)*
    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := primary ('^' ['+' | '-'] INTEGER)?
    primary := NUMBER | 'i' | VARIABLE | '(' expr ')'

Variables are ``z0 .. z{n-1}``; ``x`` and ``y`` alias ``z0`` and ``z1`` when
``n <= 2``, and ``z`` aliases ``z0`` when ``n == 1``.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainEscapeError, EvaluationError, ParseError, PoleError

POLE_FLOOR = 1e-300
SOFT_POLE_FLOOR = 1e-12


class NearPoleWarning(RuntimeWarning):
    pass


def as_vector(z, dim=None):
    """Coerce ``z`` to a 1-D complex array, checking its length if asked."""
    v = np.atleast_1d(np.asarray(z, dtype=complex))
    if v.ndim != 1:
        raise ValueError(f"expected a vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"expected a vector of dimension {dim}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise EvaluationError("non-finite entries in input vector")
    return v


class _Env:
    """Evaluation context shared by one pass over a tree."""

    def __init__(self, values, mask=False, floor=POLE_FLOOR, soft=SOFT_POLE_FLOOR):
        self.values = values
        self.n = len(values)
        self.shape = np.shape(values[0]) if values else ()
        self.mask = mask
        self.floor = floor
        self.soft = soft
        self.near_pole = False

    def zeros_grad(self):
        return np.zeros((self.n,) + self.shape, dtype=complex)

    def check_denominator(self, den):
        mod = np.abs(den)
        bad = mod < self.floor
        if np.any(bad):
            if not self.mask:
                raise PoleError(f"denominator modulus {np.min(mod):.3e} below pole floor {self.floor:g}")
            den = np.where(bad, np.nan, den)
        if np.any(mod < self.soft):
            self.near_pole = True
        return den


class Node:
    """Base class for expression nodes."""

    precedence = 5

    def evaluate(self, env):
        raise NotImplementedError

    def forward(self, env):
        """Return ``(value, gradient)``; gradient has a leading axis of size n."""
        raise NotImplementedError

    def substitute(self, nodes):
        raise NotImplementedError

    def max_variable(self):
        return -1

    def text(self):
        raise NotImplementedError

    def __str__(self):
        return self.text()


def _wrap(node, min_prec):
    s = node.text()
    return f"({s})" if node.precedence < min_prec else s


@dataclass(frozen=True)
class Const(Node):
    value: complex

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise EvaluationError(f"non-finite constant {self.value!r}")

    def evaluate(self, env):
        return complex(self.value)

    def forward(self, env):
        return complex(self.value), env.zeros_grad()

    def substitute(self, nodes):
        return self

    def text(self):
        v = complex(self.value)
        if v == 1j:
            return "i"
        if v.imag == 0 and v.real >= 0:
            return repr(float(v.real))
        if v.real == 0:
            return f"({repr(float(v.imag))}*i)" if v.imag >= 0 else f"(-{repr(float(-v.imag))}*i)"
        if v.imag == 0:
            return f"(-{repr(float(-v.real))})"
        sign = "+" if v.imag >= 0 else "-"
        head = repr(float(v.real)) if v.real >= 0 else f"-{repr(float(-v.real))}"
        return f"({head} {sign} {repr(float(abs(v.imag)))}*i)"


@dataclass(frozen=True)
class Var(Node):
    index: int

    def evaluate(self, env):
        return env.values[self.index]

    def forward(self, env):
        g = env.zeros_grad()
        g[self.index] = 1.0
        return env.values[self.index], g

    def substitute(self, nodes):
        return nodes[self.index]

    def max_variable(self):
        return self.index

    def text(self):
        return f"z{self.index}"


@dataclass(frozen=True)
class Neg(Node):
    arg: Node
    precedence = 3

    def evaluate(self, env):
        return -self.arg.evaluate(env)

    def forward(self, env):
        v, g = self.arg.forward(env)
        return -v, -g

    def substitute(self, nodes):
        return Neg(self.arg.substitute(nodes))

    def max_variable(self):
        return self.arg.max_variable()

    def text(self):
        return "-" + _wrap(self.arg, 3)


@dataclass(frozen=True)
class _Binary(Node):
    left: Node
    right: Node

    def substitute(self, nodes):
        return type(self)(self.left.substitute(nodes), self.right.substitute(nodes))

    def max_variable(self):
        return max(self.left.max_variable(), self.right.max_variable())


class Add(_Binary):
    precedence = 1

    def evaluate(self, env):
        return self.left.evaluate(env) + self.right.evaluate(env)

    def forward(self, env):
        a, da = self.left.forward(env)
        b, db = self.right.forward(env)
        return a + b, da + db

    def text(self):
        return f"{_wrap(self.left, 1)} + {_wrap(self.right, 2)}"


class Sub(_Binary):
    precedence = 1

    def evaluate(self, env):
        return self.left.evaluate(env) - self.right.evaluate(env)

    def forward(self, env):
        a, da = self.left.forward(env)
        b, db = self.right.forward(env)
        return a - b, da - db

    def text(self):
        return f"{_wrap(self.left, 1)} - {_wrap(self.right, 2)}"


class Mul(_Binary):
    precedence = 2

    def evaluate(self, env):
        return self.left.evaluate(env) * self.right.evaluate(env)

    def forward(self, env):
        a, da = self.left.forward(env)
        b, db = self.right.forward(env)
        return a * b, da * b + a * db

    def text(self):
        return f"{_wrap(self.left, 2)}*{_wrap(self.right, 3)}"


class Div(_Binary):
    precedence = 2

    def evaluate(self, env):
        den = env.check_denominator(self.right.evaluate(env))
        with np.errstate(invalid="ignore"):
            return self.left.evaluate(env) / den

    def forward(self, env):
        a, da = self.left.forward(env)
        b, db = self.right.forward(env)
        b = env.check_denominator(b)
        with np.errstate(invalid="ignore"):
            q = a / b
            return q, (da - q * db) / b

    def text(self):
        return f"{_wrap(self.left, 2)}/{_wrap(self.right, 3)}"


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exponent: int
    precedence = 4

    def evaluate(self, env):
        b = self.base.evaluate(env)
        k = self.exponent
        if k >= 0:
            return b**k
        b = env.check_denominator(b)
        return 1.0 / b ** (-k)

    def forward(self, env):
        b, db = self.base.forward(env)
        k = self.exponent
        if k == 0:
            return np.ones_like(b) if np.ndim(b) else 1.0 + 0j, env.zeros_grad()
        if k > 0:
            return b**k, k * b ** (k - 1) * db
        b = env.check_denominator(b)
        return 1.0 / b ** (-k), k * db / b ** (1 - k)

    def substitute(self, nodes):
        return Pow(self.base.substitute(nodes), self.exponent)

    def max_variable(self):
        return self.base.max_variable()

    def text(self):
        return f"{_wrap(self.base, 5)}^{self.exponent}"


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            bad = len(text[pos:]) - len(text[pos:].lstrip()) + pos
            raise ParseError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, arity):
        self.tokens = _tokenize(text)
        self.k = 0
        self.arity = arity

    @property
    def tok(self):
        return self.tokens[self.k]

    def take(self, value=None):
        kind, val, pos = self.tok
        if value is not None and val != value:
            found = "end of input" if kind == "end" else repr(val)
            raise ParseError(f"expected {value!r}, found {found}", pos)
        self.k += 1
        return kind, val, pos

    def parse_map(self):
        comps = [self.expr()]
        while self.tok[1] == ",":
            self.take()
            comps.append(self.expr())
        if self.tok[0] != "end":
            raise ParseError(f"unexpected token {self.tok[1]!r}", self.tok[2])
        return comps

    def expr(self):
        node = self.term()
        while self.tok[1] in ("+", "-") and self.tok[0] == "op":
            _, op, _ = self.take()
            right = self.term()
            node = Add(node, right) if op == "+" else Sub(node, right)
        return node

    def term(self):
        node = self.unary()
        while self.tok[1] in ("*", "/") and self.tok[0] == "op":
            _, op, _ = self.take()
            right = self.unary()
            node = Mul(node, right) if op == "*" else Div(node, right)
        return node

    def unary(self):
        if self.tok[0] == "op" and self.tok[1] == "-":
            self.take()
            return Neg(self.unary())
        if self.tok[0] == "op" and self.tok[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.primary()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.take()
            sign = 1
            if self.tok[1] in ("+", "-") and self.tok[0] == "op":
                sign = -1 if self.take()[1] == "-" else 1
            kind, val, pos = self.take()
            if kind != "num" or not val.isdigit():
                raise ParseError("exponent must be an integer literal", pos)
            return Pow(base, sign * int(val))
        return base

    def primary(self):
        kind, val, pos = self.take()
        if kind == "num":
            if not np.isfinite(float(val)):
                raise ParseError(f"literal {val} overflows", pos)
            return Const(complex(float(val)))
        if kind == "id":
            return self.identifier(val, pos)
        if val == "(":
            node = self.expr()
            self.take(")")
            return node
        found = "end of input" if kind == "end" else repr(val)
        raise ParseError(f"unexpected {found}", pos)

    def identifier(self, name, pos):
        if name == "i":
            return Const(1j)
        m = re.fullmatch(r"z(\d+)", name)
        if m:
            index = int(m.group(1))
        elif name in ("x", "y") and self.arity <= 2:
            index = 0 if name == "x" else 1
        elif name == "z" and self.arity == 1:
            index = 0
        else:
            raise ParseError(f"unknown identifier {name!r}", pos)
        if index >= self.arity:
            raise ParseError(f"variable {name!r} has index {index} >= arity {self.arity}", pos)
        return Var(index)


def parse_expression(text: str, arity: int) -> Node:
    comps = _Parser(text, arity).parse_map()
    if len(comps) != 1:
        raise ParseError("expected a single expression", None)
    return comps[0]


def parse_map(text: str, arity: int) -> "HolomorphicMap":
    """Parse comma-separated component expressions into a map of ``arity`` variables."""
    if arity < 0:
        raise ValueError("arity must be non-negative")
    return HolomorphicMap(tuple(_Parser(text, arity).parse_map()), arity)


# ---------------------------------------------------------------- maps


@dataclass(frozen=True)
class HolomorphicMap:
    """Vector of rational expressions in ``arity`` complex variables."""

    components: tuple
    arity: int

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        for c in self.components:
            if c.max_variable() >= self.arity:
                raise ValueError(f"component references variable z{c.max_variable()} beyond arity {self.arity}")

    @property
    def dim(self):
        return len(self.components)

    def _env(self, values, mask=False):
        return _Env(values, mask=mask)

    def __call__(self, z) -> np.ndarray:
        z = as_vector(z, self.arity)
        env = self._env(list(z))
        out = np.array([complex(c.evaluate(env)) for c in self.components])
        return self._finish(env, out)

    def evaluate_many(self, Z, on_pole="raise") -> np.ndarray:
        """Evaluate at N points (rows of ``Z``); ``on_pole='nan'`` masks poles instead of raising."""
        Z = np.asarray(Z, dtype=complex).reshape(-1, self.arity)
        env = self._env([Z[:, j] for j in range(self.arity)], mask=on_pole == "nan")
        out = np.empty((Z.shape[0], self.dim), dtype=complex)
        for i, c in enumerate(self.components):
            out[:, i] = c.evaluate(env)
        if on_pole == "nan":
            return out
        return self._finish(env, out)

    def jacobian(self, z) -> np.ndarray:
        z = as_vector(z, self.arity)
        env = self._env(list(z))
        J = np.empty((self.dim, self.arity), dtype=complex)
        for i, c in enumerate(self.components):
            _, g = c.forward(env)
            J[i] = g
        return self._finish(env, J)

    def jacobian_many(self, Z, on_pole="raise") -> np.ndarray:
        Z = np.asarray(Z, dtype=complex).reshape(-1, self.arity)
        env = self._env([Z[:, j] for j in range(self.arity)], mask=on_pole == "nan")
        J = np.empty((Z.shape[0], self.dim, self.arity), dtype=complex)
        for i, c in enumerate(self.components):
            _, g = c.forward(env)
            J[:, i, :] = np.moveaxis(np.broadcast_to(g, (self.arity, Z.shape[0])), 0, -1)
        if on_pole == "nan":
            return J
        return self._finish(env, J)

    def _finish(self, env, out):
        if env.near_pole:
            warnings.warn("evaluation close to a pole", NearPoleWarning, stacklevel=3)
        if not np.all(np.isfinite(out)):
            raise EvaluationError("evaluation produced a non-finite value")
        return out

    def iterate(self, z, n: int, guard=None) -> np.ndarray:
        """Apply the map ``n`` times pointwise; ``guard`` is an optional domain to stay inside."""
        if self.dim != self.arity:
            raise ValueError("only self-maps (dim == arity) can be iterated")
        z = as_vector(z, self.arity)
        for step in range(n):
            z = self(z)
            if guard is not None and not guard.contains(z):
                raise DomainEscapeError(f"orbit left the domain at step {step + 1}", point=z, step=step + 1)
        return z

    def compose(self, inner: "HolomorphicMap") -> "HolomorphicMap":
        """Return ``self o inner`` by substituting inner components for variables."""
        if inner.dim != self.arity:
            raise ValueError("dimension mismatch in composition")
        nodes = list(inner.components)
        return HolomorphicMap(tuple(c.substitute(nodes) for c in self.components), inner.arity)

    def to_text(self) -> str:
        return ", ".join(c.text() for c in self.components)

    def __str__(self):
        return self.to_text()


def evaluate(f: HolomorphicMap, z) -> np.ndarray:
    return f(z)


def jacobian(f: HolomorphicMap, z) -> np.ndarray:
    return f.jacobian(z)


def iterate(f: HolomorphicMap, z, n: int, guard=None) -> np.ndarray:
    return f.iterate(z, n, guard=guard)


# ---------------------------------------------------------------- builders


def _const_node(c):
    c = complex(c)
    if c.imag == 0 and c.real < 0:
        return Neg(Const(complex(-c.real)))
    return Const(c)


def linear_combination(terms: Sequence, constant=0.0) -> Node:
    """Build ``sum(coeff * node) + constant``, dropping zero coefficients."""
    node = None
    for coeff, term in terms:
        coeff = complex(coeff)
        if coeff == 0:
            continue
        if coeff == 1:
            piece, negate = term, False
        elif coeff == -1:
            piece, negate = term, True
        elif coeff.imag == 0 and coeff.real < 0:
            piece, negate = Mul(Const(complex(-coeff.real)), term), True
        else:
            piece, negate = Mul(Const(coeff), term), False
        if node is None:
            node = Neg(piece) if negate else piece
        else:
            node = Sub(node, piece) if negate else Add(node, piece)
    constant = complex(constant)
    if node is None:
        return _const_node(constant)
    if constant != 0:
        if constant.imag == 0 and constant.real < 0:
            node = Sub(node, Const(complex(-constant.real)))
        else:
            node = Add(node, Const(constant))
    return node


def identity_map(n: int) -> HolomorphicMap:
    return HolomorphicMap(tuple(Var(j) for j in range(n)), n)


def constant_map(c, arity: int) -> HolomorphicMap:
    c = as_vector(c)
    return HolomorphicMap(tuple(_const_node(v) for v in c), arity)


def affine_map(A, b=None) -> HolomorphicMap:
    """z -> A z + b."""
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    m, n = A.shape
    b = np.zeros(m, dtype=complex) if b is None else as_vector(b, m)
    comps = [linear_combination([(A[i, j], Var(j)) for j in range(n)], b[i]) for i in range(m)]
    return HolomorphicMap(tuple(comps), n)


def affine_post(f: HolomorphicMap, A, b=None, *, include_input=None) -> HolomorphicMap:
    """Return ``z -> A f(z) + b`` (+ ``B z`` when ``include_input=B`` is given).

    Used to assemble maps such as ``a + t (f(z) - a)`` or charts built
    from a map and the identity without leaving the expression world.
    """
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    m = A.shape[0]
    b = np.zeros(m, dtype=complex) if b is None else as_vector(b, m)
    B = None if include_input is None else np.atleast_2d(np.asarray(include_input, dtype=complex))
    comps = []
    for i in range(m):
        terms = [(A[i, k], f.components[k]) for k in range(f.dim)]
        if B is not None:
            terms += [(B[i, j], Var(j)) for j in range(f.arity)]
        comps.append(linear_combination(terms, b[i]))
    return HolomorphicMap(tuple(comps), f.arity)
