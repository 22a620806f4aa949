"""Tokenizer and precedence parser for the expression language.

Grammar (EBNF)::

    expr    = term , { ("+" | "-") , term } ;
    term    = unary , { ("*" | "/") , unary } ;
    unary   = ("-" | "+") , unary | power ;
    power   = primary , [ "^" , unary ] ;          (* right associative *)
    primary = number | constant | variable
            | function , "(" , expr , ")"
            | "(" , expr , ")" ;
    number  = digit , { digit } , [ "." , { digit } ] , [ exponent ]
            | "." , digit , { digit } , [ exponent ] ;
    exponent = ("e" | "E") , [ "+" | "-" ] , digit , { digit } ;

``^`` binds tighter than unary minus, so ``-x^2`` is ``-(x^2)`` and
``2^-1`` is ``2^(-1)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import List, Optional, Sequence

from .tree import (COMPLEX, CONSTANT, FUNCTIONS, MODES, NONREAL_FUNCTIONS, QUATERNION,
                   REAL, Expr, binary, const, power, unary, var)

MAX_REAL_ARITY = 9


class ExprError(ValueError):
    """Base class for expression errors; ``offset`` is a byte offset into the text."""

    def __init__(self, message: str, offset: Optional[int] = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)


class ExprSyntaxError(ExprError):
    pass


class UnknownIdentifierError(ExprError):
    def __init__(self, name: str, offset: int, detail: str = ""):
        self.name = name
        super().__init__(f"unknown identifier `{name}`{detail}", offset)


class ModeMismatchError(ExprError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "ident", "op", "end"
    text: str
    offset: int


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))")


def tokenize(text: str) -> List[Token]:
    if not text.isascii():
        bad = next(i for i, ch in enumerate(text) if not ch.isascii())
        raise ExprSyntaxError("non-ASCII character", len(text[:bad].encode()))
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos == len(text):
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        tokens.append(Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


_MODE_SYMBOLS = {
    "z": COMPLEX,
    "h": QUATERNION,
    "i": COMPLEX,
    "j": QUATERNION,
    "k": QUATERNION,
}


class _Parser:
    def __init__(self, text: str, mode: str, arity: int, names: Optional[Sequence[str]]):
        self.tokens = tokenize(text)
        self.pos = 0
        self.mode = mode
        self.arity = arity
        self.variables = self._variable_table(names)

    def _variable_table(self, names):
        if self.mode == COMPLEX:
            return {"z": 1}
        if self.mode == QUATERNION:
            return {"h": 1}
        if names is not None:
            return {n: i + 1 for i, n in enumerate(names)}
        table = {f"x{i}": i for i in range(1, self.arity + 1)}
        if self.arity <= 3:
            table.update({n: i for i, n in enumerate("xyz"[:self.arity], start=1)})
        return table

    # -- token helpers ---------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def expect(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind != "op":
            found = self.tok.text or "end of input"
            raise ExprSyntaxError(f"expected {text!r}, found {found!r}", self.tok.offset)
        return self.advance()

    # -- grammar ---------------------------------------------------------
    def parse(self) -> Expr:
        if self.tok.kind == "end":
            raise ExprSyntaxError("empty expression", 0)
        e = self.expr()
        if self.tok.kind != "end":
            raise ExprSyntaxError(f"unexpected token {self.tok.text!r}", self.tok.offset)
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            left = binary(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            left = binary(op, left, self.unary())
        return left

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text in "+-":
            sign = self.advance().text
            literal_next = self.tok.kind == "num"
            operand = self.unary()
            if sign == "+":
                return operand
            if literal_next and operand.kind == CONSTANT:
                return const(-operand.literal, self.mode, self.arity)
            return unary("neg", operand)
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            return power(base, self.unary())
        return base

    def primary(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return const(float(t.text), self.mode, self.arity)
        if t.kind == "op" and t.text == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "ident":
            self.advance()
            return self.identifier(t)
        found = t.text or "end of input"
        raise ExprSyntaxError(f"unexpected {found!r}", t.offset)

    def identifier(self, t: Token) -> Expr:
        name = t.text
        if self.tok.kind == "op" and self.tok.text == "(" and name in FUNCTIONS:
            if name in NONREAL_FUNCTIONS and self.mode == REAL:
                raise ModeMismatchError(f"{name}() needs complex or quaternion mode", t.offset)
            self.advance()
            arg = self.expr()
            self.expect(")")
            return unary(name, arg)
        if name in FUNCTIONS:
            raise ExprSyntaxError(f"function {name} needs an argument", t.offset)
        if name in self.variables:
            return var(self.variables[name], self.mode, self.arity, name)
        if name == "pi":
            return const(math.pi, self.mode, self.arity)
        if name == "e":
            return const(math.e, self.mode, self.arity)
        if self.mode == COMPLEX and name == "i":
            return const(1j, self.mode, self.arity)
        if self.mode == QUATERNION and name in ("i", "j", "k"):
            q = {"i": (0.0, 1.0, 0.0, 0.0), "j": (0.0, 0.0, 1.0, 0.0), "k": (0.0, 0.0, 0.0, 1.0)}
            return const(q[name], self.mode, self.arity)
        owner = _MODE_SYMBOLS.get(name)
        if self.mode == REAL and owner is not None and name != "z":
            raise ModeMismatchError(f"`{name}` is not available in real mode", t.offset)
        if self.mode != REAL and (re.fullmatch(r"x\d?|y", name) or
                                  (owner is not None and owner != self.mode and name != "i")):
            raise ModeMismatchError(f"`{name}` is not available in {self.mode} mode", t.offset)
        detail = f" (real mode arity {self.arity})" if self.mode == REAL else ""
        raise UnknownIdentifierError(name, t.offset, detail)


def parse(text: str, mode: str = REAL, arity: Optional[int] = None,
          names: Optional[Sequence[str]] = None) -> Expr:
    """Parse ``text`` into an :class:`Expr`.

    In real mode the variables are ``x1..xN`` (and ``x, y, z`` when N <= 3)
    unless explicit ``names`` are given. Complex mode uses ``z``, quaternion
    mode ``h``.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    if mode == REAL:
        if names is not None:
            arity = len(names)
        if arity is None:
            arity = 2
        if not 1 <= arity <= MAX_REAL_ARITY:
            raise ValueError(f"real-mode arity must be in 1..{MAX_REAL_ARITY}")
    else:
        arity = 1
    return _Parser(text, mode, arity, names).parse()
