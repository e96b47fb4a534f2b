"""Text grammar for expressions: parser and canonical printer.

Grammar (whitespace is insignificant)::

    expr     := term (("+" | "-") term)*
    term     := unary (("*" | "/") unary)*
    unary    := "-" unary | "+" unary | power
    power    := atom ("^" exponent)?
    exponent := "-"? (INT | PARAM) | "(" "-"? (INT | PARAM) ")"
    atom     := INT | NAME | "(" expr ")"

``NAME`` resolves against a :class:`SpaceSpec`; jet names ``u_<digits>``
are order-insensitive (``u_10`` is ``u_01``). ``PARAM`` names are integer
parameters bound by the caller (used by operator families).
"""

from __future__ import annotations

import re
from collections.abc import Mapping
from fractions import Fraction
from typing import TYPE_CHECKING

from diffinv.exprcore.expr import Expr, pow_int
from diffinv.exprcore.poly import Poly, unpack

if TYPE_CHECKING:
    from diffinv.jetspace.coords import SpaceSpec


class ParseError(ValueError):
    """Syntax or resolution error; ``pos`` is the 0-based character offset."""

    def __init__(self, message: str, pos: int, text: str = ""):
        super().__init__(f"{message} at position {pos}")
        self.message = message
        self.pos = pos
        self.text = text


class UnknownVariableError(ParseError):
    pass


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<int>[0-9]+)|(?P<name>[A-Za-z][A-Za-z0-9]*(?:_[0-9]+)?)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, space: SpaceSpec | None, params: Mapping[str, int]):
        self.text = text
        self.space = space
        self.params = dict(params)
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, msg: str, pos: int | None = None):
        if pos is None:
            pos = self.peek()[2]
        raise ParseError(msg, pos, self.text)

    def expect(self, value: str):
        kind, val, pos = self.peek()
        if val != value or kind != "op":
            self.error(f"expected {value!r}" + (f", found {val!r}" if val else ", found end of input"))
        self.take()

    def parse(self) -> Expr:
        if self.peek()[0] == "end":
            self.error("empty expression")
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            self.error(f"unexpected {val!r}")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                rhs = self.term()
                e = e + rhs if val == "+" else e - rhs
            else:
                return e

    def term(self) -> Expr:
        e = self.unary()
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and val in "*/":
                self.take()
                rhs = self.unary()
                if val == "*":
                    e = e * rhs
                else:
                    if rhs.is_zero:
                        msg = "zero denominator literal" if rhs.is_constant else "division by zero"
                        self.error(msg, pos)
                    e = e / rhs
            else:
                return e

    def unary(self) -> Expr:
        kind, val, _ = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            e = self.unary()
            return -e if val == "-" else e
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, val, pos = self.peek()
        if kind == "op" and val == "^":
            self.take()
            k = self.exponent()
            if k < 0 and base.is_zero:
                self.error("zero raised to a negative power", pos)
            try:
                return pow_int(base, k)
            except OverflowError as exc:
                self.error(str(exc), pos)
        return base

    def exponent(self) -> int:
        paren = False
        kind, val, _ = self.peek()
        if kind == "op" and val == "(":
            self.take()
            paren = True
        sign = 1
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            sign = -1
        kind, val, pos = self.take()
        if kind == "int":
            k = int(val)
        elif kind == "name" and val in self.params:
            k = int(self.params[val])
        else:
            self.error("exponent must be an integer literal or a bound parameter", pos)
        if paren:
            self.expect(")")
        return sign * k

    def atom(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "int":
            return Expr.const(int(val), self.space)
        if kind == "name":
            if val in self.params:
                return Expr.const(int(self.params[val]), self.space)
            if self.space is None:
                raise UnknownVariableError(f"unknown variable {val!r}", pos, self.text)
            try:
                coord = self.space.lookup(val)
            except KeyError:
                raise UnknownVariableError(f"unknown variable {val!r}", pos, self.text) from None
            return Expr.var(coord, self.space)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "end":
            self.error("unexpected end of input", pos)
        self.error(f"unexpected {val!r}", pos)


def parse_expr(text: str, space: SpaceSpec | None = None, params: Mapping[str, int] | None = None) -> Expr:
    """Parse ``text`` into a canonical :class:`Expr` over ``space``."""
    e = _Parser(text, space, params or {}).parse()
    if e.space is None and space is not None:
        e = Expr(Poly(e.num.terms, space), Poly(e.den.terms, space))
    return e


def _format_coef(c) -> str:
    c = Fraction(c)
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _format_monomial(m: int, space: SpaceSpec) -> str:
    parts = []
    for i, e in unpack(m):
        name = space.name(space.coord_at(i))
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts)


def format_poly(p: Poly) -> str:
    if p.is_zero:
        return "0"
    out = []
    for k, (m, c) in enumerate(p.sorted_terms()):
        neg = c < 0
        a = -c if neg else c
        if m == 0:
            body = _format_coef(a)
        else:
            mono = _format_monomial(m, p.space)
            body = mono if a == 1 else f"{_format_coef(a)}*{mono}"
        if k == 0:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)


def print_expr(e: Expr) -> str:
    """Deterministic text form that parses back to the same Expr."""
    if e.den.is_one:
        return format_poly(e.num)
    return f"({format_poly(e.num)})/({format_poly(e.den)})"
