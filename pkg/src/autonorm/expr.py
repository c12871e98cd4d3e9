"""Closed-form expression language for compactly supported smooth fields on R^2n.

Coordinates are ordered ``(x1, y1, x2, y2, ..., xn, yn)``; a variable node
stores its position in that vector.  Grammar::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := base ("^" integer)?
    base   := number | var | func "(" expr ")" | "(" expr ")" | "-" base
    var    := ("x"|"y") positive-integer
    func   := "exp" | "bump" | "step"

Note that unary minus binds tighter than ``^``: ``-x1^2`` is ``(-x1)^2``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

INF = math.inf

FUNCS = ("exp", "bump", "step")


# ---------------------------------------------------------------- scalar kernels


def bump(t: float) -> float:
    if abs(t) >= 1.0:
        return 0.0
    return math.exp(1.0 - 1.0 / (1.0 - t * t))


def bump_d1(t: float) -> float:
    b = bump(t)
    if b == 0.0:
        return 0.0
    u = 1.0 - t * t
    return b * (-2.0 * t) / (u * u)


def bump_d2(t: float) -> float:
    b = bump(t)
    if b == 0.0:
        return 0.0
    u = 1.0 - t * t
    return b * (4.0 * t * t / u**4 - 2.0 / u**2 - 8.0 * t * t / u**3)


def _sigma(t: float) -> float:
    return math.exp(-1.0 / t) if t > 0.0 else 0.0


def _sigma_d1(t: float) -> float:
    s = _sigma(t)
    return s / (t * t) if s > 0.0 else 0.0


def _sigma_d2(t: float) -> float:
    s = _sigma(t)
    return s * (1.0 / t**4 - 2.0 / t**3) if s > 0.0 else 0.0


def step(t: float) -> float:
    if t <= 0.0:
        return 0.0
    if t >= 1.0:
        return 1.0
    p, q = _sigma(t), _sigma(1.0 - t)
    return p / (p + q)


def step_d1(t: float) -> float:
    if t <= 0.0 or t >= 1.0:
        return 0.0
    p, q = _sigma(t), _sigma(1.0 - t)
    num = _sigma_d1(t) * q + p * _sigma_d1(1.0 - t)
    return num / (p + q) ** 2


def step_d2(t: float) -> float:
    if t <= 0.0 or t >= 1.0:
        return 0.0
    p, q = _sigma(t), _sigma(1.0 - t)
    dp, dq = _sigma_d1(t), -_sigma_d1(1.0 - t)
    ddp, ddq = _sigma_d2(t), _sigma_d2(1.0 - t)
    d = p + q
    num = dp * q - p * dq
    dnum = ddp * q - p * ddq
    return dnum / d**2 - 2.0 * num * (dp + dq) / d**3


def _exp(t: float) -> float:
    try:
        return math.exp(t)
    except OverflowError:
        return INF


_SCALAR = {"exp": (_exp, _exp), "bump": (bump, bump_d1), "step": (step, step_d1)}


# ---------------------------------------------------------------- AST


def _lift(v: Node | float | int) -> Node:
    if isinstance(v, Node):
        return v
    if isinstance(v, (int, float)):
        return Const(float(v))
    raise TypeError(f"cannot build an expression from {type(v).__name__}")


class Node:
    """Base AST node.  Arithmetic operators build larger trees."""

    def __add__(self, other):
        return Add(self, _lift(other))

    def __radd__(self, other):
        return Add(_lift(other), self)

    def __sub__(self, other):
        return Sub(self, _lift(other))

    def __rsub__(self, other):
        return Sub(_lift(other), self)

    def __mul__(self, other):
        return Mul(self, _lift(other))

    def __rmul__(self, other):
        return Mul(_lift(other), self)

    def __truediv__(self, other):
        return Div(self, _lift(other))

    def __neg__(self):
        return Neg(self)

    def __pow__(self, k: int):
        return Pow(self, int(k))


@dataclass(frozen=True)
class Const(Node):
    value: float


@dataclass(frozen=True)
class Var(Node):
    index: int  # position in (x1, y1, ..., xn, yn)

    @property
    def name(self) -> str:
        return ("x", "y")[self.index % 2] + str(self.index // 2 + 1)


@dataclass(frozen=True)
class Add(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Sub(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Mul(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Div(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exponent: int


@dataclass(frozen=True)
class Neg(Node):
    arg: Node


@dataclass(frozen=True)
class Call(Node):
    func: str
    arg: Node


def x(i: int) -> Var:
    return Var(2 * (i - 1))


def y(i: int) -> Var:
    return Var(2 * (i - 1) + 1)


def call(func: str, arg) -> Call:
    if func not in FUNCS:
        raise ValueError(f"unknown function {func!r}")
    return Call(func, _lift(arg))


def substitute(node: Node, mapping: dict[int, Node]) -> Node:
    """Replace variables by expressions (used for coordinate shifts)."""
    if isinstance(node, Var):
        return mapping.get(node.index, node)
    if isinstance(node, Const):
        return node
    if isinstance(node, (Add, Sub, Mul, Div)):
        return type(node)(substitute(node.left, mapping), substitute(node.right, mapping))
    if isinstance(node, Pow):
        return Pow(substitute(node.base, mapping), node.exponent)
    if isinstance(node, Neg):
        return Neg(substitute(node.arg, mapping))
    if isinstance(node, Call):
        return Call(node.func, substitute(node.arg, mapping))
    raise TypeError(node)


def canonical(node: Node) -> Node:
    """Fold negated constants, the one rewrite the parser applies."""
    if isinstance(node, Neg):
        arg = canonical(node.arg)
        return Const(-arg.value) if isinstance(arg, Const) else Neg(arg)
    if isinstance(node, (Add, Sub, Mul, Div)):
        return type(node)(canonical(node.left), canonical(node.right))
    if isinstance(node, Pow):
        return Pow(canonical(node.base), node.exponent)
    if isinstance(node, Call):
        return Call(node.func, canonical(node.arg))
    return node


def max_var_index(node: Node) -> int:
    if isinstance(node, Var):
        return node.index
    if isinstance(node, Const):
        return -1
    if isinstance(node, (Add, Sub, Mul, Div)):
        return max(max_var_index(node.left), max_var_index(node.right))
    if isinstance(node, Pow):
        return max_var_index(node.base)
    return max_var_index(node.arg)


# ---------------------------------------------------------------- errors


class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class UnknownIdentifier(ParseError):
    pass


class IndexOutOfRange(ParseError):
    pass


class UnguardedQuotient(ParseError):
    pass


# ---------------------------------------------------------------- interval bounds


def _safe_exp(v: float) -> float:
    try:
        return math.exp(v)
    except OverflowError:
        return INF


def _mul_iv(a, b):
    corners = []
    for p in a:
        for q in b:
            c = p * q
            if math.isnan(c):  # 0 * inf
                c = 0.0
            corners.append(c)
    return min(corners), max(corners)


def value_range(node: Node) -> tuple[float, float]:
    """Conservative (lo, hi) enclosure of the values of ``node`` on R^2n."""
    if isinstance(node, Const):
        return node.value, node.value
    if isinstance(node, Var):
        return -INF, INF
    if isinstance(node, Add):
        (a, b), (c, d) = value_range(node.left), value_range(node.right)
        return a + c, b + d
    if isinstance(node, Sub):
        (a, b), (c, d) = value_range(node.left), value_range(node.right)
        return a - d, b - c
    if isinstance(node, Mul):
        return _mul_iv(value_range(node.left), value_range(node.right))
    if isinstance(node, Div):
        num, (lo, hi) = value_range(node.left), value_range(node.right)
        if not lo > 0.0:
            return -INF, INF
        return _mul_iv(num, (1.0 / hi, 1.0 / lo))
    if isinstance(node, Neg):
        lo, hi = value_range(node.arg)
        return -hi, -lo
    if isinstance(node, Pow):
        lo, hi = value_range(node.base)
        k = node.exponent
        if k == 0:
            return 1.0, 1.0
        if k < 0:
            if not lo > 0.0:
                return -INF, INF
            return hi**k, lo**k
        if k % 2 == 1 or lo >= 0.0:
            return lo**k, hi**k
        if hi <= 0.0:
            return hi**k, lo**k
        return 0.0, max(lo**k, hi**k)
    if isinstance(node, Call):
        lo, hi = value_range(node.arg)
        if node.func == "exp":
            return _safe_exp(lo) if lo > -INF else 0.0, _safe_exp(hi)
        return 0.0, 1.0
    raise TypeError(node)


def _check_guards(node: Node, pos: int = 0) -> None:
    for child in _children(node):
        _check_guards(child, pos)
    if isinstance(node, Div) and not value_range(node.right)[0] > 0.0:
        raise UnguardedQuotient("quotient denominator has no positive lower bound", pos)
    if isinstance(node, Pow) and node.exponent < 0 and not value_range(node.base)[0] > 0.0:
        raise UnguardedQuotient("negative power of a base with no positive lower bound", pos)


def _children(node: Node) -> tuple[Node, ...]:
    if isinstance(node, (Add, Sub, Mul, Div)):
        return node.left, node.right
    if isinstance(node, Pow):
        return (node.base,)
    if isinstance(node, (Neg, Call)):
        return (node.arg,)
    return ()


# ---------------------------------------------------------------- parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<id>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)
_VAR = re.compile(r"([xy])(\d+)$")


class _Parser:
    def __init__(self, text: str, n: int):
        self.text = text
        self.n = n
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while True:
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos == len(text):
                break
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                raise ParseError(f"unexpected character {text[pos]!r}", pos)
            kind = m.lastgroup
            start = m.start(kind)
            self.tokens.append((kind, m.group(kind), start))
            pos = m.end()
        self.tokens.append(("eof", "", len(text)))
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, pos = self.take()
        if text != value or kind != "op":
            found = text or "end of input"
            raise ParseError(f"expected {value!r}, found {found!r}", pos)

    def parse(self) -> Node:
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "eof":
            raise ParseError(f"unexpected {text!r}", pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            _, op, pos = self.take()
            rhs = self.factor()
            if op == "*":
                node = Mul(node, rhs)
            else:
                if not value_range(rhs)[0] > 0.0:
                    raise UnguardedQuotient("quotient denominator has no positive lower bound", pos)
                node = Div(node, rhs)
        return node

    def factor(self) -> Node:
        node = self.base()
        if self.peek()[:2] == ("op", "^"):
            _, _, pos = self.take()
            sign = 1
            if self.peek()[:2] == ("op", "-"):
                self.take()
                sign = -1
            kind, text, npos = self.take()
            if kind != "num" or not text.isdigit():
                raise ParseError("exponent must be an integer literal", npos)
            k = sign * int(text)
            if k < 0 and not value_range(node)[0] > 0.0:
                raise UnguardedQuotient("negative power of a base with no positive lower bound", pos)
            node = Pow(node, k)
        return node

    def base(self) -> Node:
        kind, text, pos = self.take()
        if kind == "num":
            value = float(text)
            if not math.isfinite(value):
                raise ParseError(f"number {text!r} is not finite", pos)
            return Const(value)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "op" and text == "-":
            arg = self.base()
            if isinstance(arg, Const):
                return Const(-arg.value)
            return Neg(arg)
        if kind == "id":
            if text in FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            m = _VAR.match(text)
            if m is None:
                raise UnknownIdentifier(f"unknown identifier {text!r}", pos)
            idx = int(m.group(2))
            if not 1 <= idx <= self.n:
                raise IndexOutOfRange(f"variable {text!r} out of range for n={self.n}", pos)
            return Var(2 * (idx - 1) + (m.group(1) == "y"))
        found = text or "end of input"
        raise ParseError(f"unexpected {found!r}", pos)


def parse(text: str, n: int) -> HamiltonianExpr:
    if n < 1:
        raise ValueError("n must be positive")
    return HamiltonianExpr(_Parser(text, n).parse(), n)


# ---------------------------------------------------------------- printer

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Pow: 3}
_SYM = {Add: "+", Sub: "-", Mul: "*", Div: "/"}


def _prec(node: Node) -> int:
    return _PREC.get(type(node), 4)


def to_text(node: Node) -> str:
    """Canonical printer; ``parse(to_text(e))`` rebuilds the identical AST."""
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    if isinstance(node, Neg):
        inner = to_text(node.arg)
        if _prec(node.arg) < 4 or (isinstance(node.arg, Const)):
            inner = f"({inner})"
        return "-" + inner
    if isinstance(node, Pow):
        inner = to_text(node.base)
        if _prec(node.base) < 4:
            inner = f"({inner})"
        return f"{inner}^{node.exponent}"
    p = _prec(node)
    left, right = to_text(node.left), to_text(node.right)
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) <= p:
        right = f"({right})"
    return f"{left} {_SYM[type(node)]} {right}"


# ---------------------------------------------------------------- evaluation


def _eval(node: Node, z: Sequence[float]) -> float:
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return float(z[node.index])
    if isinstance(node, Add):
        return _eval(node.left, z) + _eval(node.right, z)
    if isinstance(node, Sub):
        return _eval(node.left, z) - _eval(node.right, z)
    if isinstance(node, Mul):
        return _eval(node.left, z) * _eval(node.right, z)
    if isinstance(node, Div):
        return _eval(node.left, z) / _eval(node.right, z)
    if isinstance(node, Pow):
        return _eval(node.base, z) ** node.exponent
    if isinstance(node, Neg):
        return -_eval(node.arg, z)
    if isinstance(node, Call):
        return _SCALAR[node.func][0](_eval(node.arg, z))
    raise TypeError(node)


def _grad(node: Node, z: Sequence[float], dim: int) -> tuple[float, list[float]]:
    """Forward-mode exact differentiation: (value, gradient)."""
    if isinstance(node, Const):
        return node.value, [0.0] * dim
    if isinstance(node, Var):
        g = [0.0] * dim
        g[node.index] = 1.0
        return float(z[node.index]), g
    if isinstance(node, Neg):
        v, g = _grad(node.arg, z, dim)
        return -v, [-gi for gi in g]
    if isinstance(node, Pow):
        v, g = _grad(node.base, z, dim)
        k = node.exponent
        if k == 0:
            return 1.0, [0.0] * dim
        c = k * v ** (k - 1)
        return v**k, [c * gi for gi in g]
    if isinstance(node, Call):
        v, g = _grad(node.arg, z, dim)
        f, df = _SCALAR[node.func]
        c = df(v)
        return f(v), [c * gi for gi in g]
    a, ga = _grad(node.left, z, dim)
    b, gb = _grad(node.right, z, dim)
    if isinstance(node, Add):
        return a + b, [p + q for p, q in zip(ga, gb)]
    if isinstance(node, Sub):
        return a - b, [p - q for p, q in zip(ga, gb)]
    if isinstance(node, Mul):
        return a * b, [p * b + a * q for p, q in zip(ga, gb)]
    if isinstance(node, Div):
        return a / b, [(p * b - a * q) / (b * b) for p, q in zip(ga, gb)]
    raise TypeError(node)


def _bump_array(t):
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - ti * ti))
    return out


def _sigma_array(t):
    out = np.zeros_like(t)
    pos = t > 0.0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def _step_array(t):
    p, q = _sigma_array(t), _sigma_array(1.0 - t)
    return np.where(t <= 0.0, 0.0, np.where(t >= 1.0, 1.0, p / np.where(p + q > 0, p + q, 1.0)))


_ARRAY = {"exp": np.exp, "bump": _bump_array, "step": _step_array}


def _eval_array(node: Node, Z: np.ndarray) -> np.ndarray:
    if isinstance(node, Const):
        return np.full(Z.shape[0], node.value)
    if isinstance(node, Var):
        return Z[:, node.index].astype(float)
    if isinstance(node, Add):
        return _eval_array(node.left, Z) + _eval_array(node.right, Z)
    if isinstance(node, Sub):
        return _eval_array(node.left, Z) - _eval_array(node.right, Z)
    if isinstance(node, Mul):
        return _eval_array(node.left, Z) * _eval_array(node.right, Z)
    if isinstance(node, Div):
        return _eval_array(node.left, Z) / _eval_array(node.right, Z)
    if isinstance(node, Pow):
        return _eval_array(node.base, Z) ** node.exponent
    if isinstance(node, Neg):
        return -_eval_array(node.arg, Z)
    return _ARRAY[node.func](_eval_array(node.arg, Z))


# ---------------------------------------------------------------- support


@dataclass(frozen=True)
class Box:
    """Per-coordinate closed intervals; ``empty`` marks the empty set."""

    intervals: tuple[tuple[float, float], ...]
    empty: bool = False

    @classmethod
    def full(cls, dim: int) -> Box:
        return cls(((-INF, INF),) * dim)

    @classmethod
    def nothing(cls, dim: int) -> Box:
        return cls(((0.0, 0.0),) * dim, empty=True)

    @property
    def dim(self) -> int:
        return len(self.intervals)

    @property
    def bounded(self) -> bool:
        return self.empty or all(math.isfinite(a) and math.isfinite(b) for a, b in self.intervals)

    def contains(self, z: Sequence[float]) -> bool:
        if self.empty:
            return False
        return all(a <= v <= b for v, (a, b) in zip(z, self.intervals))

    def hull(self, other: Box) -> Box:
        if self.empty:
            return other
        if other.empty:
            return self
        return Box(tuple((min(a, c), max(b, d)) for (a, b), (c, d) in zip(self.intervals, other.intervals)))

    def intersect(self, other: Box) -> Box:
        if self.empty or other.empty:
            return Box.nothing(self.dim)
        iv = tuple((max(a, c), min(b, d)) for (a, b), (c, d) in zip(self.intervals, other.intervals))
        if any(a > b for a, b in iv):
            return Box.nothing(self.dim)
        return Box(iv)

    def disjoint(self, other: Box) -> bool:
        return self.intersect(other).empty

    def shifted(self, index: int, offset: float) -> Box:
        if self.empty:
            return self
        iv = list(self.intervals)
        a, b = iv[index]
        iv[index] = (a + offset, b + offset)
        return Box(tuple(iv))

    def radius(self) -> float:
        """Radius of the smallest origin-centred ball containing the box."""
        if self.empty:
            return 0.0
        return math.sqrt(sum(max(a * a, b * b) for a, b in self.intervals))

    def to_list(self) -> list[list[float]] | None:
        return None if self.empty else [[a, b] for a, b in self.intervals]


def _affine(node: Node) -> tuple[dict[int, float], float] | None:
    """Coefficients and offset when ``node`` is affine in the coordinates."""
    if isinstance(node, Const):
        return {}, node.value
    if isinstance(node, Var):
        return {node.index: 1.0}, 0.0
    if isinstance(node, Neg):
        r = _affine(node.arg)
        return None if r is None else ({k: -v for k, v in r[0].items()}, -r[1])
    if isinstance(node, (Add, Sub)):
        a, b = _affine(node.left), _affine(node.right)
        if a is None or b is None:
            return None
        s = 1.0 if isinstance(node, Add) else -1.0
        coef = dict(a[0])
        for k, v in b[0].items():
            coef[k] = coef.get(k, 0.0) + s * v
        return coef, a[1] + s * b[1]
    if isinstance(node, Mul):
        a, b = _affine(node.left), _affine(node.right)
        if a is None or b is None:
            return None
        if not a[0]:
            a, b = b, a
        if b[0]:
            return None
        c = b[1]
        return {k: v * c for k, v in a[0].items()}, a[1] * c
    if isinstance(node, Div):
        a, b = _affine(node.left), _affine(node.right)
        if a is None or b is None or b[0]:
            return None
        return {k: v / b[1] for k, v in a[0].items()}, a[1] / b[1]
    return None


def _support(node: Node, dim: int) -> Box:
    if isinstance(node, Const):
        return Box.nothing(dim) if node.value == 0.0 else Box.full(dim)
    if isinstance(node, Var):
        return Box.full(dim)
    if isinstance(node, (Add, Sub)):
        return _support(node.left, dim).hull(_support(node.right, dim))
    if isinstance(node, Mul):
        return _support(node.left, dim).intersect(_support(node.right, dim))
    if isinstance(node, Div):
        return _support(node.left, dim)
    if isinstance(node, Pow):
        return Box.full(dim) if node.exponent == 0 else _support(node.base, dim)
    if isinstance(node, Neg):
        return _support(node.arg, dim)
    if isinstance(node, Call):
        if node.func == "exp":
            return Box.full(dim)
        aff = _affine(node.arg)
        if aff is None:
            return Box.full(dim)
        coef = {k: v for k, v in aff[0].items() if v != 0.0}
        off = aff[1]
        if not coef:
            fn = bump if node.func == "bump" else step
            return Box.nothing(dim) if fn(off) == 0.0 else Box.full(dim)
        if len(coef) > 1:
            return Box.full(dim)
        (k, a), = coef.items()
        if node.func == "bump":
            lo, hi = sorted(((-1.0 - off) / a, (1.0 - off) / a))
        elif a > 0:
            lo, hi = -off / a, INF
        else:
            lo, hi = -INF, -off / a
        iv = [(-INF, INF)] * dim
        iv[k] = (lo, hi)
        return Box(tuple(iv))
    raise TypeError(node)


# ---------------------------------------------------------------- public wrapper


@dataclass(frozen=True)
class HamiltonianExpr:
    """An expression together with the half-dimension ``n`` of its phase space."""

    root: Node
    n: int

    def __post_init__(self):
        if max_var_index(self.root) >= 2 * self.n:
            raise ValueError(f"expression uses a variable beyond dimension 2n={2 * self.n}")
        _check_guards(self.root)

    @property
    def dim(self) -> int:
        return 2 * self.n

    def __call__(self, z: Sequence[float]) -> float:
        return _eval(self.root, z)

    def grad(self, z: Sequence[float]) -> list[float]:
        return _grad(self.root, z, self.dim)[1]

    def values(self, Z: np.ndarray) -> np.ndarray:
        """Vectorized evaluation over an array of points of shape (N, 2n)."""
        Z = np.asarray(Z, dtype=float).reshape(-1, self.dim)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            return _eval_array(self.root, Z)

    @cached_property
    def support(self) -> Box:
        return _support(self.root, self.dim)

    def support_bound(self) -> Box | None:
        box = self.support
        return box if box.bounded else None

    def shifted(self, index: int, offset: float) -> HamiltonianExpr:
        """``z -> F(z - offset * e_index)``: the field translated by ``offset``."""
        v = Var(index)
        return HamiltonianExpr(substitute(self.root, {index: v - offset}), self.n)

    def __str__(self) -> str:
        return to_text(self.root)


def evaluate(e: HamiltonianExpr, z: Sequence[float]) -> float:
    if len(z) != e.dim:
        raise ValueError(f"point has {len(z)} coordinates, expected {e.dim}")
    return e(z)


def gradient(e: HamiltonianExpr, z: Sequence[float]) -> list[float]:
    if len(z) != e.dim:
        raise ValueError(f"point has {len(z)} coordinates, expected {e.dim}")
    return e.grad(z)


def support_bound(e: HamiltonianExpr) -> Box | None:
    """Certified box outside which ``e`` vanishes, or None if not certified."""
    return e.support_bound()
