"""Immutable expression trees."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

CONSTANT = "constant"
VARIABLE = "variable"
UNARY = "unary-function"
BINARY = "binary-operator"
POWER = "power"

REAL = "real"
COMPLEX = "complex"
QUATERNION = "quaternion"
MODES = (REAL, COMPLEX, QUATERNION)

FUNCTIONS = ("exp", "log", "sin", "cos", "tan", "sqrt", "abs", "re", "im", "conj")
# only valid outside real mode
NONREAL_FUNCTIONS = ("re", "im", "conj")
BINARY_OPS = ("+", "-", "*", "/")

Literal = Union[float, complex, Tuple[float, float, float, float]]


@dataclass(frozen=True)
class Expr:
    """A node of an expression tree.

    ``func`` holds the function tag for unary nodes (``neg`` for unary minus)
    and the operator symbol for binary nodes. Variable nodes carry a 1-based
    ``index``; ``name`` is cosmetic and ignored by equality.
    """

    kind: str
    children: Tuple["Expr", ...] = ()
    literal: Optional[Literal] = None
    func: Optional[str] = None
    index: Optional[int] = None
    mode: str = REAL
    arity: int = 1
    name: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        expected = {CONSTANT: 0, VARIABLE: 0, UNARY: 1, BINARY: 2, POWER: 2}
        if self.kind not in expected:
            raise ValueError(f"unknown node kind {self.kind!r}")
        if len(self.children) != expected[self.kind]:
            raise ValueError(f"{self.kind} node needs {expected[self.kind]} children")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.kind == VARIABLE and not (1 <= (self.index or 0) <= self.arity):
            raise ValueError(f"variable index {self.index} outside 1..{self.arity}")
        if self.kind == UNARY and self.func in NONREAL_FUNCTIONS and self.mode == REAL:
            raise ValueError(f"{self.func} is not available in real mode")

    # -- structure -------------------------------------------------------
    @property
    def depth(self) -> int:
        if not self.children:
            return 1
        return 1 + max(c.depth for c in self.children)

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def variables(self) -> frozenset:
        """Indices of the variables appearing in the tree."""
        return frozenset(n.index for n in self.walk() if n.kind == VARIABLE)

    def variable_names(self) -> frozenset:
        return frozenset(variable_name(n.index, n.mode, n.arity, n.name)
                         for n in self.walk() if n.kind == VARIABLE)

    def funcs(self) -> frozenset:
        return frozenset(n.func for n in self.walk() if n.kind == UNARY)

    def __str__(self) -> str:
        return to_text(self)


def variable_name(index: int, mode: str, arity: int, name: Optional[str] = None) -> str:
    if name:
        return name
    if mode == COMPLEX:
        return "z"
    if mode == QUATERNION:
        return "h"
    return f"x{index}"


# -- constructors ---------------------------------------------------------

def const(value, mode: str = REAL, arity: int = 1) -> Expr:
    return Expr(CONSTANT, literal=value, mode=mode, arity=arity)


def var(index: int, mode: str = REAL, arity: int = 1, name: Optional[str] = None) -> Expr:
    return Expr(VARIABLE, index=index, mode=mode, arity=arity, name=name)


def unary(func: str, arg: Expr) -> Expr:
    return Expr(UNARY, (arg,), func=func, mode=arg.mode, arity=arg.arity)


def binary(op: str, left: Expr, right: Expr) -> Expr:
    return Expr(BINARY, (left, right), func=op, mode=left.mode, arity=left.arity)


def power(base: Expr, exponent: Expr) -> Expr:
    return Expr(POWER, (base, exponent), mode=base.mode, arity=base.arity)


# -- printing -------------------------------------------------------------

_UNITS = {(0.0, 1.0, 0.0, 0.0): "i", (0.0, 0.0, 1.0, 0.0): "j", (0.0, 0.0, 0.0, 1.0): "k"}


def _literal_text(value, mode: str) -> str:
    if isinstance(value, tuple):
        key = tuple(float(v) for v in value)
        if key in _UNITS:
            return _UNITS[key]
        if key[1:] == (0.0, 0.0, 0.0):
            return _literal_text(key[0], mode)
        a, b, c, d = key
        return f"({a!r}+{b!r}*i+{c!r}*j+{d!r}*k)"
    if isinstance(value, complex):
        if value == 1j:
            return "i"
        if value.imag == 0.0:
            return _literal_text(value.real, mode)
        return f"({value.real!r}+{value.imag!r}*i)"
    value = float(value)
    text = repr(value)
    if value < 0 or text.startswith("-"):
        return f"({text})"
    return text


def to_text(e: Expr) -> str:
    """Canonical, fully parenthesised text that re-parses to an equal tree."""
    if e.kind == CONSTANT:
        return _literal_text(e.literal, e.mode)
    if e.kind == VARIABLE:
        return variable_name(e.index, e.mode, e.arity, e.name)
    if e.kind == UNARY:
        arg = to_text(e.children[0])
        if e.func == "neg":
            # a bare literal after '-' would be folded into a negative constant
            if e.children[0].kind == CONSTANT:
                arg = f"({arg})"
            return f"(-{arg})"
        return f"{e.func}({arg})"
    left, right = (to_text(c) for c in e.children)
    op = "^" if e.kind == POWER else e.func
    return f"({left}{op}{right})"
