"""Canonical rational functions over jet coordinates."""

from __future__ import annotations

from collections.abc import Mapping
from fractions import Fraction
from typing import TYPE_CHECKING

from diffinv.exprcore.poly import Coef, Poly, as_coef, join_space, poly_cofactors

if TYPE_CHECKING:
    from diffinv.jetspace.coords import JetCoord, SpaceSpec


class EvaluationError(ValueError):
    """Raised when an expression cannot be evaluated at a point."""


class DegeneratePoint(EvaluationError):
    """A denominator vanishes at the requested point; pick another point."""


class Expr:
    """A reduced fraction ``num/den`` of polynomials.

    ``den`` is never zero, shares no non-constant factor with ``num`` and
    has leading coefficient 1 in graded lex order, so equal rational
    functions have identical ``(num, den)``.
    """

    __slots__ = ("_hash", "den", "num")

    def __init__(self, num: Poly, den: Poly | None = None):
        if den is None or den.is_one:
            self.num = num
            self.den = den if den is not None else Poly.const(1, num.space)
            self._hash = None
            return
        if den.is_zero:
            raise ZeroDivisionError("zero denominator")
        space = join_space(num.space, den.space)
        if den.is_constant:
            num = num.scale(Fraction(1) / Fraction(den.constant))
            den = Poly.const(1, space)
        elif num.is_zero:
            den = Poly.const(1, space)
        else:
            g, fn, fd = poly_cofactors(num, den)
            if not g.is_constant:
                num, den = fn, fd
            _, lc = den.leading()
            if lc != 1:
                inv = Fraction(1) / Fraction(lc)
                num, den = num.scale(inv), den.scale(inv)
        self.num = num
        self.den = den
        self._hash = None

    @classmethod
    def _poly(cls, num: Poly) -> Expr:
        e = cls.__new__(cls)
        e.num = num
        e.den = Poly.const(1, num.space)
        e._hash = None
        return e

    # -- constructors ---------------------------------------------------
    @classmethod
    def const(cls, c, space: SpaceSpec | None = None) -> Expr:
        return cls._poly(Poly.const(as_coef(Fraction(c) if isinstance(c, str) else c), space))

    @classmethod
    def var(cls, coord: JetCoord, space: SpaceSpec) -> Expr:
        return cls._poly(Poly.var(coord, space))

    @classmethod
    def zero(cls, space: SpaceSpec | None = None) -> Expr:
        return cls._poly(Poly.zero(space))

    @classmethod
    def one(cls, space: SpaceSpec | None = None) -> Expr:
        return cls._poly(Poly.const(1, space))

    # -- inspection -----------------------------------------------------
    @property
    def space(self) -> SpaceSpec | None:
        return self.num.space if self.num.space is not None else self.den.space

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def is_polynomial(self) -> bool:
        return self.den.is_one

    @property
    def is_constant(self) -> bool:
        return self.den.is_one and self.num.is_constant

    @property
    def constant(self) -> Fraction:
        if not self.is_constant:
            raise ValueError("expression is not constant")
        return Fraction(self.num.constant)

    def coords(self) -> tuple[JetCoord, ...]:
        """Jet coordinates occurring in numerator or denominator, sorted."""
        sp = self.space
        if sp is None:
            return ()
        idx = sorted(set(self.num.variables()) | set(self.den.variables()))
        return tuple(sp.coord_at(i) for i in idx)

    def max_order(self) -> int:
        return max((c.order for c in self.coords()), default=0)

    def __eq__(self, other) -> bool:
        if isinstance(other, Expr):
            return self.num == other.num and self.den == other.den
        if isinstance(other, (int, Fraction)):
            return self.den.is_one and self.num == other
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __bool__(self) -> bool:
        return not self.num.is_zero

    def __repr__(self) -> str:
        return f"Expr({self})"

    def __str__(self) -> str:
        from diffinv.exprcore.grammar import print_expr

        return print_expr(self)

    # -- arithmetic -----------------------------------------------------
    def _coerce(self, other) -> Expr:
        if isinstance(other, Expr):
            return other
        if isinstance(other, Poly):
            return Expr._poly(other)
        return Expr.const(other, self.space)

    def __neg__(self) -> Expr:
        e = Expr.__new__(Expr)
        e.num, e.den, e._hash = -self.num, self.den, None
        return e

    def __add__(self, other) -> Expr:
        other = self._coerce(other)
        if self.den.is_one and other.den.is_one:
            return Expr._poly(self.num + other.num)
        if self.den == other.den:
            return Expr(self.num + other.num, self.den)
        return Expr(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __sub__(self, other) -> Expr:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> Expr:
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> Expr:
        other = self._coerce(other)
        if self.den.is_one and other.den.is_one:
            return Expr._poly(self.num * other.num)
        return Expr(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> Expr:
        other = self._coerce(other)
        if other.is_zero:
            raise ZeroDivisionError("division by the zero expression")
        if other.is_constant:
            return Expr(self.num.scale(Fraction(1) / other.constant), self.den)
        return Expr(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other) -> Expr:
        return self._coerce(other) / self

    def __pow__(self, k: int) -> Expr:
        return pow_int(self, k)

    # -- calculus and evaluation ---------------------------------------
    def diff_index(self, i: int) -> Expr:
        dn = self.num.diff(i)
        if self.den.is_one:
            return Expr._poly(dn)
        dd = self.den.diff(i)
        if dd.is_zero:
            return Expr(dn, self.den)
        return Expr(dn * self.den - self.num * dd, self.den * self.den)

    def diff(self, v: JetCoord) -> Expr:
        """Formal partial derivative, every jet coordinate being an independent symbol."""
        sp = self.space
        if sp is None:
            return Expr.zero()
        return self.diff_index(sp.index(v))

    def eval_values(self, values) -> Coef:
        """Evaluate with values indexed by canonical coordinate index."""
        d = self.den.eval_values(values) if not self.den.is_one else 1
        if d == 0:
            raise DegeneratePoint("denominator vanishes at the evaluation point")
        n = self.num.eval_values(values)
        return n if d == 1 else as_coef(Fraction(n) / d)

    def eval(self, point: Mapping[JetCoord, object]) -> Fraction:
        sp = self.space
        if sp is None:
            return Fraction(self.num.constant)
        n_vars = max(list(self.num.variables()) + list(self.den.variables()), default=-1) + 1
        values = [0] * n_vars
        for i in set(self.num.variables()) | set(self.den.variables()):
            c = sp.coord_at(i)
            if c not in point:
                raise EvaluationError(f"no value assigned to {sp.name(c)}")
            values[i] = as_coef(Fraction(point[c]))
        return Fraction(self.eval_values(values))


def arith(a: Expr, b: Expr, op: str) -> Expr:
    """Exact field arithmetic; ``op`` is one of add, sub, mul, div."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def pow_int(a: Expr, k: int) -> Expr:
    if not isinstance(k, int):
        raise TypeError("exponent must be an integer")
    if k < 0:
        if a.is_zero:
            raise ZeroDivisionError("zero raised to a negative power")
        return Expr(a.den ** (-k), a.num ** (-k))
    if k == 0:
        return Expr.one(a.space)
    if a.den.is_one:
        return Expr._poly(a.num ** k)
    # reduced fractions stay reduced under powers; only the sign of den may need fixing
    return Expr(a.num ** k, a.den ** k)


def diff_partial(e: Expr, v: JetCoord) -> Expr:
    return e.diff(v)


def eval_at(e: Expr, point: Mapping[JetCoord, object]) -> Fraction:
    return e.eval(point)
