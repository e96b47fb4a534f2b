"""Point vector fields, their prolongations, commutators and operator families."""

from __future__ import annotations

import threading
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Protocol

from diffinv.exprcore.expr import Expr
from diffinv.exprcore.grammar import parse_expr
from diffinv.exprcore.poly import sum_of_products
from diffinv.jetspace.calculus import lower_coordinates, total_derivative
from diffinv.jetspace.coords import DEP, DERIV, INDEP, JetCoord, SpaceSpec


@dataclass(frozen=True)
class VectorField:
    """X = sum_i xi[i] d/dx_i + sum_a eta[a] d/du^a with coefficients in (x, u).

    Equality and hashing ignore the label.
    """

    space: SpaceSpec
    xi: tuple[Expr, ...]
    eta: tuple[Expr, ...]
    label: str = field(default="", compare=False)

    def __post_init__(self):
        sp = self.space
        xi = tuple(_as_expr(c, sp) for c in self.xi)
        eta = tuple(_as_expr(c, sp) for c in self.eta)
        if len(xi) != sp.p or len(eta) != sp.q:
            raise ValueError(
                f"expected {sp.p} xi and {sp.q} eta coefficients, got {len(xi)} and {len(eta)}"
            )
        point_vars = sp.p + sp.q
        for c in xi + eta:
            if any(i >= point_vars for i in c.num.variables() + c.den.variables()):
                raise ValueError("vector field coefficients may not depend on derivatives")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "eta", eta)

    @classmethod
    def from_components(cls, space: SpaceSpec, components: dict, label: str = "") -> VectorField:
        """Build from ``{coordinate name or JetCoord: Expr or text}``; missing entries are 0."""
        xi = [Expr.zero(space)] * space.p
        eta = [Expr.zero(space)] * space.q
        for key, value in components.items():
            coord = space.lookup(key) if isinstance(key, str) else key
            if isinstance(value, str):
                value = parse_expr(value, space)
            if coord.kind == INDEP:
                xi[coord.var] = value
            elif coord.kind == DEP:
                eta[coord.var] = value
            else:
                raise ValueError("vector fields act on independent and dependent variables only")
        return cls(space, tuple(xi), tuple(eta), label)

    def coefficient(self, coord: JetCoord) -> Expr:
        if coord.kind == INDEP:
            return self.xi[coord.var]
        if coord.kind == DEP:
            return self.eta[coord.var]
        raise ValueError("use prolong() for coefficients on derivative coordinates")

    @property
    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.xi + self.eta)

    def act(self, f: Expr) -> Expr:
        """First-order action X(f) on a function of x and u."""
        sp = self.space
        total = Expr.zero(sp)
        for c in f.coords():
            if c.kind == DERIV:
                raise ValueError("act() is for functions of x and u; prolong for jets")
            coef = self.coefficient(c)
            if not coef.is_zero:
                total = total + coef * f.diff(c)
        return total

    def __add__(self, other: VectorField) -> VectorField:
        return VectorField(
            self.space,
            tuple(a + b for a, b in zip(self.xi, other.xi)),
            tuple(a + b for a, b in zip(self.eta, other.eta)),
            f"{self.label}+{other.label}",
        )

    def __sub__(self, other: VectorField) -> VectorField:
        return self + (-1) * other

    def __rmul__(self, c) -> VectorField:
        c = Fraction(c)
        return VectorField(
            self.space,
            tuple(a * c for a in self.xi),
            tuple(a * c for a in self.eta),
            f"{c}*{self.label}",
        )

    def __str__(self) -> str:
        sp = self.space
        parts = []
        for i, c in enumerate(self.xi):
            if not c.is_zero:
                parts.append(f"({c})*d/d{sp.indep_names[i]}")
        for a, c in enumerate(self.eta):
            if not c.is_zero:
                parts.append(f"({c})*d/d{sp.dep_names[a]}")
        body = " + ".join(parts) or "0"
        return f"{self.label}: {body}" if self.label else body


def _as_expr(c, space: SpaceSpec) -> Expr:
    if isinstance(c, Expr):
        return c
    if isinstance(c, str):
        return parse_expr(c, space)
    return Expr.const(c, space)


class ProlongedField:
    """Order-r prolongation of a vector field.

    Coefficients on derivative coordinates are computed one order at a time,
    on first use, and cached.
    """

    def __init__(self, base: VectorField, order: int):
        if order < 0:
            raise ValueError("prolongation order must be non-negative")
        self.base = base
        self.order = order
        self.space = base.space
        self._lock = threading.Lock()
        self._coeffs: dict[JetCoord, Expr] = {
            JetCoord.dep(a): eta for a, eta in enumerate(base.eta)
        }
        self._done = 0
        self._dxi: list[list[Expr]] | None = None

    @property
    def label(self) -> str:
        return self.base.label

    def _total_xi(self) -> list[list[Expr]]:
        if self._dxi is None:
            sp = self.space
            self._dxi = [
                [total_derivative(xj, i, sp) for xj in self.base.xi] for i in range(sp.p)
            ]
        return self._dxi

    def _ensure(self, s: int) -> None:
        if s <= self._done:
            return
        if s > self.order:
            raise ValueError(f"order {s} exceeds prolongation order {self.order}")
        with self._lock:
            sp = self.space
            dxi = self._total_xi()
            for level in range(self._done + 1, s + 1):
                for coord in sp.coords(level)[sp.jet_dimension(level - 1):]:
                    i = coord.multi[-1]
                    parent = JetCoord.deriv(coord.var, coord.multi[:-1])
                    value = total_derivative(self._coeffs[parent], i, sp)
                    for j, d in enumerate(dxi[i]):
                        if not d.is_zero:
                            value = value - d * Expr.var(parent.shifted(j), sp)
                    self._coeffs[coord] = value
                self._done = level

    def coefficient(self, coord: JetCoord) -> Expr:
        if coord.kind == INDEP:
            return self.base.xi[coord.var]
        self._ensure(coord.order)
        return self._coeffs[coord]

    @property
    def coeffs(self) -> dict[JetCoord, Expr]:
        """Coefficients on all dependent and derivative coordinates up to ``order``."""
        self._ensure(self.order)
        return dict(self._coeffs)

    def row(self) -> list[Expr]:
        """Coefficients in canonical coordinate order (x, u, then derivatives)."""
        return [self.coefficient(c) for c in self.space.coords(self.order)]


def prolong(X: VectorField, r: int, space: SpaceSpec | None = None) -> ProlongedField:
    if space is not None and space != X.space:
        raise ValueError("vector field lives in a different space")
    return ProlongedField(X, r)


def apply(Xp: ProlongedField, F: Expr) -> Expr:
    """pr X (F): sum of coefficient times partial derivative over the coordinates of F."""
    sp = Xp.space
    coords = F.coords()
    if not coords:
        return Expr.zero(sp)
    top = max(c.order for c in coords)
    if top > Xp.order:
        raise ValueError(f"expression has order {top} but the prolongation has order {Xp.order}")
    coefs = [(c, Xp.coefficient(c)) for c in coords]
    if F.den.is_one and all(k.den.is_one for _, k in coefs):
        pairs = ((k.num, F.num.diff(sp.index(c))) for c, k in coefs if not k.is_zero)
        return Expr._poly(sum_of_products(pairs, sp))
    total = Expr.zero(sp)
    for c, k in coefs:
        if not k.is_zero:
            total = total + k * F.diff(c)
    return total


def commutator(X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y] with components X(Y^i) - Y(X^i)."""
    if X.space != Y.space:
        raise ValueError("vector fields live in different spaces")
    xi = tuple(X.act(b) - Y.act(a) for a, b in zip(X.xi, Y.xi))
    eta = tuple(X.act(b) - Y.act(a) for a, b in zip(X.eta, Y.eta))
    return VectorField(X.space, xi, eta, f"[{X.label},{Y.label}]")


# -- operator families --------------------------------------------------------

class Family(Protocol):
    def members(self, K: int | None, space: SpaceSpec) -> list[VectorField]: ...


ROTATION = "rotation"
TRANSLATION = "translation"
DEPENDENT_SCALING = "dependent_scaling"


@dataclass(frozen=True)
class OperatorFamily:
    """Built-in template multiplied by u^k, k = 0..K.

    ``rotation``: u^k (x_mu d_nu - x_nu d_mu) for mu < nu;
    ``translation``: u^k d_mu; ``dependent_scaling``: u^k d_u.
    ``indices`` restricts rotations to given (mu, nu) pairs or translations
    to given mu; ``None`` means all.
    """

    kind: str
    indices: tuple | None = None

    def __post_init__(self):
        if self.kind not in (ROTATION, TRANSLATION, DEPENDENT_SCALING):
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.kind == ROTATION and self.indices is not None:
            if any(mu >= nu for mu, nu in self.indices):
                raise ValueError("rotation pairs need mu < nu")

    def members(self, K: int | None, space: SpaceSpec) -> list[VectorField]:
        if K is None or K < 0:
            raise ValueError("truncation order K must be a non-negative integer")
        if space.q != 1:
            raise ValueError("built-in families assume a single dependent variable")
        u = Expr.var(space.u(), space)
        zero = Expr.zero(space)
        low = lower_coordinates(space)
        out = []
        for k in range(K + 1):
            uk = u ** k
            if self.kind == ROTATION:
                pairs = self.indices or tuple(combinations(range(space.p), 2))
                for mu, nu in pairs:
                    xi = [zero] * space.p
                    xi[nu] = uk * low[mu]
                    xi[mu] = -(uk * low[nu])
                    out.append(VectorField(space, tuple(xi), (zero,), f"J^{k}_{{{mu}{nu}}}"))
            elif self.kind == TRANSLATION:
                for mu in self.indices or range(space.p):
                    xi = [zero] * space.p
                    xi[mu] = uk
                    out.append(VectorField(space, tuple(xi), (zero,), f"P^{k}_{mu}"))
            else:
                out.append(VectorField(space, (zero,) * space.p, (uk,), f"P^{k}_u"))
        return out


def family_member_label(name: str, k: int) -> str:
    """``J_{01}`` -> ``J^2_{01}``; names without ``_`` get a plain superscript."""
    if "_" in name:
        head, tail = name.split("_", 1)
        return f"{head}^{k}_{tail}"
    return f"{name}^{k}"


@dataclass(frozen=True)
class TemplateFamily:
    """Coefficient templates in a parameter (default ``k``) over ``k_min..k_max``."""

    name: str
    components: tuple[tuple[str, str], ...]
    k_min: int
    k_max: int
    param: str = "k"

    def members(self, K: int | None, space: SpaceSpec) -> list[VectorField]:
        top = self.k_max if K is None else K
        out = []
        for k in range(self.k_min, top + 1):
            comps = {
                var: parse_expr(text, space, {self.param: k}) for var, text in self.components
            }
            out.append(VectorField.from_components(space, comps, family_member_label(self.name, k)))
        return out


def eikonal_families() -> tuple[OperatorFamily, ...]:
    return (
        OperatorFamily(ROTATION),
        OperatorFamily(TRANSLATION),
        OperatorFamily(DEPENDENT_SCALING),
    )


def instantiate_family(
    families: Iterable[Family], K: int | None, space: SpaceSpec
) -> list[VectorField]:
    """Concatenate family members: declaration order, then k ascending, then indices."""
    out: list[VectorField] = []
    for fam in families:
        out.extend(fam.members(K, space))
    return out


def build_eikonal_algebra(n: int, K: int) -> list[VectorField]:
    """Truncated Poincare-type family J^k_{mu nu}, P^k_mu, P^k_u on n+1 Minkowski variables."""
    return instantiate_family(eikonal_families(), K, SpaceSpec.eikonal(n))


def dilation(space: SpaceSpec) -> VectorField:
    """D = x_mu d_mu; with the metric applied to both indices this is x^mu d/dx^mu."""
    xs = tuple(Expr.var(space.x(mu), space) for mu in range(space.p))
    return VectorField(space, xs, tuple(Expr.zero(space) for _ in range(space.q)), "D")


def build_classical_generating_set(n: int) -> list[VectorField]:
    """J_{mu nu}, D, P^0_u and P^0_mu."""
    space = SpaceSpec.eikonal(n)
    rot = OperatorFamily(ROTATION).members(0, space)
    rot = [VectorField(space, X.xi, X.eta, X.label.replace("^0", "")) for X in rot]
    return (
        rot
        + [dilation(space)]
        + OperatorFamily(DEPENDENT_SCALING).members(0, space)
        + OperatorFamily(TRANSLATION).members(0, space)
    )


def labels(ops: Sequence[VectorField]) -> list[str]:
    return [X.label for X in ops]
