"""Sparse multivariate polynomials over Q in jet coordinates.

A monomial is packed into one Python int. The exponent of the variable
with canonical index ``i`` (see :meth:`SpaceSpec.index`) occupies bits
``[16*i, 16*i + 15)``; bit ``16*i + 15`` is a guard bit that must stay
clear. Multiplying monomials is then integer addition, and a set guard
bit signals exponent overflow.

Coefficients are ``int`` or :class:`fractions.Fraction`; a Fraction with
denominator 1 is never stored.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from fractions import Fraction
from functools import cache, reduce
from math import gcd as igcd
from operator import or_
from typing import TYPE_CHECKING, Union

if TYPE_CHECKING:
    from diffinv.jetspace.coords import JetCoord, SpaceSpec


Rat = Fraction
Coef = Union[int, Fraction]

WIDTH = 16
MAX_EXPONENT = (1 << (WIDTH - 1)) - 1
_FIELD = (1 << WIDTH) - 1


@cache
def _guard_mask(nfields: int) -> int:
    bit = 1 << (WIDTH - 1)
    return sum(bit << (WIDTH * i) for i in range(nfields))


def _has_guard(m: int) -> bool:
    return bool(m & _guard_mask(m.bit_length() // WIDTH + 1))


def _overflow():
    raise OverflowError(f"exponent overflow: exponents must not exceed {MAX_EXPONENT}")


def unpack(m: int) -> list[tuple[int, int]]:
    """Sparse ``[(var_index, exponent), ...]`` view of a packed monomial."""
    out = []
    i = 0
    while m:
        e = m & _FIELD
        if e:
            out.append((i, e))
        m >>= WIDTH
        i += 1
    return out


def pack(exponents: Iterable[tuple[int, int]]) -> int:
    m = 0
    for i, e in exponents:
        if e < 0:
            raise ValueError("negative exponent in monomial")
        if e > MAX_EXPONENT:
            _overflow()
        m += e << (WIDTH * i)
    if _has_guard(m):
        _overflow()
    return m


def var_monomial(i: int) -> int:
    return 1 << (WIDTH * i)


def _dense(m: int) -> tuple[int, ...]:
    out = []
    while m:
        out.append(m & _FIELD)
        m >>= WIDTH
    return tuple(out)


def grlex_key(m: int) -> tuple[int, tuple[int, ...]]:
    """Sort key for graded lex order; lower variable index is the more significant variable."""
    exps = _dense(m)
    return (sum(exps), exps)


def as_coef(c) -> Coef:
    """Normalize a scalar to the stored coefficient form."""
    if type(c) is int:
        return c
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, int):  # bool, numpy ints
        return int(c)
    raise TypeError(f"unsupported coefficient type {type(c).__name__}")


def _cdiv(a: Coef, b: Coef) -> Coef:
    if type(a) is int and type(b) is int and a % b == 0:
        return a // b
    return as_coef(Fraction(a) / b)


def join_space(a: SpaceSpec | None, b: SpaceSpec | None) -> SpaceSpec | None:
    if a is b or b is None:
        return a
    if a is None or a == b:
        return b if a is None else a
    raise ValueError("operands belong to different jet spaces")


class Poly:
    """Immutable sparse polynomial; ``terms`` maps packed monomials to coefficients."""

    __slots__ = ("_hash", "_memo", "space", "terms")

    def __init__(self, terms: Mapping[int, Coef] | None = None, space: SpaceSpec | None = None):
        self.terms = dict(terms) if terms else {}
        self.space = space
        self._hash = None
        self._memo = {}

    @classmethod
    def _raw(cls, terms: dict, space, frac: bool = True) -> Poly:
        # terms may hold zero coefficients / unnormalized Fractions when frac is set
        p = cls.__new__(cls)
        if frac:
            terms = {m: as_coef(c) for m, c in terms.items() if c}
        p.terms = terms
        p.space = space
        p._hash = None
        p._memo = {}
        return p

    # -- constructors ---------------------------------------------------
    @classmethod
    def zero(cls, space: SpaceSpec | None = None) -> Poly:
        return cls._raw({}, space, False)

    @classmethod
    def const(cls, c, space: SpaceSpec | None = None) -> Poly:
        c = as_coef(c)
        return cls._raw({0: c} if c else {}, space, False)

    @classmethod
    def var(cls, coord: JetCoord, space: SpaceSpec) -> Poly:
        return cls._raw({var_monomial(space.index(coord)): 1}, space, False)

    @classmethod
    def from_dict(cls, data: Mapping[Mapping[JetCoord, int], object], space: SpaceSpec) -> Poly:
        """Build from ``{ {coord: exponent, ...}: coefficient }``."""
        terms: dict[int, Coef] = {}
        for mono, c in data.items():
            m = pack((space.index(v), e) for v, e in mono.items() if e)
            terms[m] = terms.get(m, 0) + as_coef(c)
        return cls._raw(terms, space)

    # -- inspection -----------------------------------------------------
    def __len__(self) -> int:
        return len(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_constant(self) -> bool:
        t = self.terms
        return not t or (len(t) == 1 and 0 in t)

    @property
    def is_one(self) -> bool:
        t = self.terms
        return len(t) == 1 and t.get(0) == 1

    @property
    def constant(self) -> Coef:
        """Value of a constant polynomial."""
        if not self.is_constant:
            raise ValueError("polynomial is not constant")
        return self.terms.get(0, 0)

    def _has_frac(self) -> bool:
        f = self._memo.get("frac")
        if f is None:
            f = self._memo["frac"] = any(type(c) is not int for c in self.terms.values())
        return f

    def _or(self) -> int:
        v = self._memo.get("or")
        if v is None:
            v = self._memo["or"] = reduce(or_, self.terms, 0)
        return v

    def _max_exponent(self) -> int:
        v = self._memo.get("maxexp")
        if v is None:
            v = self._memo["maxexp"] = max(_dense(self._or()), default=0)
        return v

    def variables(self) -> tuple[int, ...]:
        """Sorted indices of the variables that occur."""
        v = self._memo.get("vars")
        if v is None:
            v = self._memo["vars"] = tuple(i for i, _ in unpack(self._or()))
        return v

    def coords(self) -> tuple[JetCoord, ...]:
        if self.space is None:
            return ()
        return tuple(self.space.coord_at(i) for i in self.variables())

    def degree_in(self, i: int) -> int:
        shift = WIDTH * i
        return max(((m >> shift) & _FIELD for m in self.terms), default=0)

    @property
    def total_degree(self) -> int:
        return max((sum(_dense(m)) for m in self.terms), default=0)

    def leading(self) -> tuple[int, Coef]:
        """Leading (monomial, coefficient) in graded lex order."""
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        lm = self._memo.get("lm")
        if lm is None:
            lm = self._memo["lm"] = max(self.terms, key=grlex_key)
        return lm, self.terms[lm]

    def sorted_terms(self) -> list[tuple[int, Coef]]:
        """Terms in descending graded lex order."""
        return sorted(self.terms.items(), key=lambda t: grlex_key(t[0]), reverse=True)

    def monomials(self) -> dict[tuple[tuple[JetCoord, int], ...], Coef]:
        """Decoded ``{((coord, exponent), ...): coefficient}``."""
        sp = self.space
        return {
            tuple((sp.coord_at(i), e) for i, e in unpack(m)): c for m, c in self.terms.items()
        }

    def coeffs_in(self, i: int) -> dict[int, Poly]:
        """View as a univariate polynomial in variable ``i``: degree -> coefficient."""
        shift = WIDTH * i
        parts: dict[int, dict[int, Coef]] = {}
        for m, c in self.terms.items():
            e = (m >> shift) & _FIELD
            parts.setdefault(e, {})[m - (e << shift)] = c
        return {e: Poly._raw(t, self.space, False) for e, t in parts.items()}

    # -- equality -------------------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            if self.terms != other.terms:
                return False
            return self.space is None or other.space is None or self.space == other.space
        if isinstance(other, (int, Fraction)):
            return self.is_constant and self.terms.get(0, 0) == other
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            if self.is_constant:
                self._hash = hash(self.terms.get(0, 0))
            else:
                self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __repr__(self) -> str:
        from diffinv.exprcore.grammar import format_poly

        return f"Poly({format_poly(self)!r})"

    # -- arithmetic -----------------------------------------------------
    def _coerce(self, other) -> Poly:
        if isinstance(other, Poly):
            return other
        return Poly.const(other, self.space)

    def __neg__(self) -> Poly:
        return Poly._raw({m: -c for m, c in self.terms.items()}, self.space, False)

    def __add__(self, other) -> Poly:
        other = self._coerce(other)
        space = join_space(self.space, other.space)
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        out = dict(a)
        get = out.get
        for m, c in b.items():
            out[m] = get(m, 0) + c
        frac = self._has_frac() or other._has_frac()
        if frac:
            return Poly._raw(out, space)
        return Poly._raw({m: c for m, c in out.items() if c}, space, False)

    __radd__ = __add__

    def __sub__(self, other) -> Poly:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> Poly:
        return self._coerce(other) - self

    def scale(self, c) -> Poly:
        c = as_coef(c)
        if not c:
            return Poly.zero(self.space)
        if c == 1:
            return self
        if type(c) is int and not self._has_frac():
            return Poly._raw({m: v * c for m, v in self.terms.items()}, self.space, False)
        return Poly._raw({m: v * c for m, v in self.terms.items()}, self.space)

    def __mul__(self, other) -> Poly:
        if not isinstance(other, Poly):
            return self.scale(other)
        space = join_space(self.space, other.space)
        a, b = self.terms, other.terms
        if not a or not b:
            return Poly.zero(space)
        if self._max_exponent() + other._max_exponent() > MAX_EXPONENT:
            if _has_guard(self._or() + other._or()) and any(
                _has_guard(ma + mb) for ma in a for mb in b
            ):
                _overflow()
        if len(a) < len(b):
            a, b = b, a
        if len(b) == 1:
            (mb, cb), = b.items()
            out = {ma + mb: ca * cb for ma, ca in a.items()}
            return Poly._raw(out, space, self._has_frac() or other._has_frac())
        out: dict[int, Coef] = {}
        get = out.get
        for mb, cb in b.items():
            for ma, ca in a.items():
                k = ma + mb
                out[k] = get(k, 0) + ca * cb
        if self._has_frac() or other._has_frac():
            return Poly._raw(out, space)
        return Poly._raw({m: c for m, c in out.items() if c}, space, False)

    __rmul__ = __mul__

    def mul_monomial(self, m: int, c: Coef = 1) -> Poly:
        if m and self.terms and _has_guard(self._or() + m):
            if any(_has_guard(k + m) for k in self.terms):
                _overflow()
        frac = type(c) is not int or self._has_frac()
        return Poly._raw({k + m: v * c for k, v in self.terms.items()}, self.space, frac)

    def __pow__(self, k: int) -> Poly:
        if not isinstance(k, int) or k < 0:
            raise ValueError("Poly powers must be non-negative integers")
        result = Poly.const(1, self.space)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def diff(self, i: int) -> Poly:
        """Partial derivative with respect to the variable with index ``i``."""
        key = ("d", i)
        d = self._memo.get(key)
        if d is not None:
            return d
        shift = WIDTH * i
        unit = 1 << shift
        out = {}
        for m, c in self.terms.items():
            e = (m >> shift) & _FIELD
            if e:
                out[m - unit] = c * e
        d = self._memo[key] = Poly._raw(out, self.space, self._has_frac())
        return d

    def primitive(self) -> tuple[Coef, Poly]:
        """``(c, P)`` with ``self = c*P``, P integral with coprime coefficients and positive lex-leading coefficient."""
        if not self.terms:
            return 1, self
        den = 1
        for c in self.terms.values():
            if type(c) is not int:
                den = den * c.denominator // igcd(den, c.denominator)
        ints = [int(c * den) for c in self.terms.values()]
        g = reduce(igcd, ints)
        if self.terms[max(self.terms)] < 0:
            g = -g
        if g == 1 and den == 1:
            return 1, self
        out = {m: int(c * den) // g for m, c in self.terms.items()}
        return as_coef(Fraction(g, den)), Poly._raw(out, self.space, False)

    # -- evaluation -----------------------------------------------------
    def _compiled(self):
        comp = self._memo.get("comp")
        if comp is None:
            comp = self._memo["comp"] = [(c, unpack(m)) for m, c in self.terms.items()]
        return comp

    def eval_values(self, values) -> Coef:
        """Evaluate with ``values[i]`` assigned to the variable of index ``i``."""
        total = 0
        for c, factors in self._compiled():
            t = c
            for i, e in factors:
                t = t * (values[i] if e == 1 else values[i] ** e)
            total += t
        return total


# -- exact division and gcd ---------------------------------------------------

def sum_of_products(pairs: Iterable[tuple[Poly, Poly]], space: SpaceSpec | None = None) -> Poly:
    """sum(a*b) accumulated in one dictionary; cheaper than chained ``+``."""
    out: dict[int, Coef] = {}
    get = out.get
    frac = False
    for a, b in pairs:
        if not a.terms or not b.terms:
            continue
        space = join_space(space, join_space(a.space, b.space))
        if len(a.terms) > len(b.terms):
            a, b = b, a
        if a._max_exponent() + b._max_exponent() > MAX_EXPONENT:
            if any(_has_guard(ma + mb) for ma in a.terms for mb in b.terms):
                _overflow()
        frac = frac or a._has_frac() or b._has_frac()
        bt = b.terms
        for ma, ca in a.terms.items():
            if ca == 1:
                for mb, cb in bt.items():
                    k = ma + mb
                    out[k] = get(k, 0) + cb
            else:
                for mb, cb in bt.items():
                    k = ma + mb
                    out[k] = get(k, 0) + ca * cb
    if frac:
        return Poly._raw(out, space)
    return Poly._raw({m: c for m, c in out.items() if c}, space, False)


def divide_exact(a: Poly, b: Poly) -> Poly | None:
    """Return ``q`` with ``a == q*b``, or ``None`` when ``b`` does not divide ``a``."""
    if b.is_zero:
        raise ZeroDivisionError("division by the zero polynomial")
    space = join_space(a.space, b.space)
    if a.is_zero:
        return Poly.zero(space)
    bt = b.terms
    lb = max(bt)
    cb = bt[lb]
    if len(bt) == 1:
        out = {}
        for m, c in a.terms.items():
            d = m - lb
            if d < 0 or _has_guard(d):
                return None
            out[d] = _cdiv(c, cb)
        return Poly._raw(out, space, False)
    rem = dict(a.terms)
    quot: dict[int, Coef] = {}
    others = [(m, c) for m, c in bt.items() if m != lb]
    while rem:
        la = max(rem)
        d = la - lb
        if d < 0 or _has_guard(d):
            return None
        c = _cdiv(rem.pop(la), cb)
        quot[d] = c
        get = rem.get
        for m, v in others:
            k = m + d
            nv = get(k, 0) - c * v
            if nv:
                rem[k] = as_coef(nv) if type(nv) is not int else nv
            else:
                del rem[k]
    return Poly._raw(quot, space, False)


# -- gcd ----------------------------------------------------------------------------
# Multivariate gcd is delegated to sympy's sparse integer polynomial rings.

@cache
def _zz_ring(nvars: int):
    from sympy import ZZ
    from sympy.polys.orderings import lex
    from sympy.polys.rings import PolyRing

    return PolyRing([f"v{i}" for i in range(nvars)], ZZ, lex)


def _to_ring(p: Poly, R, nvars: int):
    """Integer polynomial of R; ``p`` must have integer coefficients."""
    d = {}
    for m, c in p.terms.items():
        e = _dense(m)
        d[e + (0,) * (nvars - len(e))] = c
    return R.from_dict(d)


def _from_ring(f, space) -> Poly:
    terms = {}
    for e, c in f.items():
        m = 0
        for i, x in enumerate(e):
            if x:
                m |= x << (WIDTH * i)
        terms[m] = int(c)
    return Poly._raw(terms, space, False)


def _monic(g: Poly) -> Poly:
    _, lc = g.leading()
    return g.scale(Fraction(1) / lc) if lc != 1 else g


def poly_cofactors(a: Poly, b: Poly) -> tuple[Poly, Poly, Poly]:
    """``(g, a/g, b/g)`` with ``g`` the gcd, normalized to leading coefficient 1 (graded lex)."""
    space = join_space(a.space, b.space)
    if a.is_zero and b.is_zero:
        return Poly.zero(space), a, b
    if a.is_zero or b.is_zero:
        nz = b if a.is_zero else a
        g = _monic(nz)
        unit = Poly.const(nz.leading()[1], space)
        zero = Poly.zero(space)
        return (g, zero, unit) if a.is_zero else (g, unit, zero)
    if a.is_constant or b.is_constant:
        return Poly.const(1, space), a, b
    ca, pa = a.primitive()
    cb, pb = b.primitive()
    nvars = max(max(pa.variables()), max(pb.variables())) + 1
    R = _zz_ring(nvars)
    g, fa, fb = _to_ring(pa, R, nvars).cofactors(_to_ring(pb, R, nvars))
    g = _from_ring(g, space)
    if g.is_constant:
        return Poly.const(1, space), a, b
    _, lc = g.leading()
    # a = ca*pa = ca*g*fa = (g/lc) * (ca*lc*fa)
    return (
        g.scale(Fraction(1) / lc) if lc != 1 else g,
        _from_ring(fa, space).scale(ca * lc),
        _from_ring(fb, space).scale(cb * lc),
    )


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Greatest common divisor, normalized to leading coefficient 1 (graded lex)."""
    return poly_cofactors(a, b)[0]
