"""Total derivatives and metric contractions on jet space."""

from __future__ import annotations

from collections.abc import Sequence

from diffinv.exprcore.expr import Expr
from diffinv.exprcore.poly import Poly, var_monomial
from diffinv.jetspace.coords import DERIV, INDEP, Metric, SpaceSpec


def _check_cap(e: Expr, space: SpaceSpec, r_cap: int) -> None:
    order = e.max_order()
    if order > r_cap:
        raise ValueError(f"expression involves derivatives of order {order} > r_cap={r_cap}")


def _total_derivative_poly(p: Poly, i: int, space: SpaceSpec) -> Poly:
    out = p.diff(i)  # explicit x_i dependence; index of x_i is i
    for idx in p.variables():
        if idx < space.p:
            continue
        coord = space.coord_at(idx)
        shifted = space.index(coord.shifted(i))
        out = out + p.diff(idx).mul_monomial(var_monomial(shifted))
    return out


def total_derivative(e: Expr, i: int, space: SpaceSpec, r_cap: int | None = None) -> Expr:
    """D_i e = de/dx_i + sum over u^a_J of u^a_{J+i} * de/du^a_J.

    If ``r_cap`` is given, ``e`` may only involve derivatives up to that order;
    the result then stays within order ``r_cap + 1``.
    """
    if not 0 <= i < space.p:
        raise ValueError(f"no independent variable with index {i}")
    if r_cap is not None:
        _check_cap(e, space, r_cap)
    if e.space is None:
        return Expr.zero(space)
    num = _total_derivative_poly(e.num, i, space)
    if e.den.is_one:
        return Expr._poly(num)
    dden = _total_derivative_poly(e.den, i, space)
    if dden.is_zero:
        return Expr(num, e.den)
    return Expr(num * e.den - e.num * dden, e.den * e.den)


def contract(a: Sequence[Expr], b: Sequence[Expr], metric: Metric) -> Expr:
    """Sum over mu of sign(mu) * a[mu] * b[mu]."""
    if len(a) != len(metric) or len(b) != len(metric):
        raise ValueError(
            f"index length mismatch: {len(a)} and {len(b)} against metric of length {len(metric)}"
        )
    total = Expr.zero()
    for s, x, y in zip(metric.signs, a, b):
        term = x * y
        total = total + term if s > 0 else total - term
    return total


def lower_coordinates(space: SpaceSpec) -> list[Expr]:
    """Covariant components x_mu = sign(mu) * x^mu."""
    out = []
    for mu in range(space.p):
        x = Expr.var(space.x(mu), space)
        out.append(x if space.metric[mu] > 0 else -x)
    return out


def gradient(space: SpaceSpec, alpha: int = 0) -> list[Expr]:
    """First derivatives u_mu, mu = 0..p-1."""
    return [Expr.var(space.u(mu, alpha=alpha), space) for mu in range(space.p)]


def square_norm(space: SpaceSpec, alpha: int = 0) -> Expr:
    """u_mu u_mu contracted with the metric."""
    g = gradient(space, alpha)
    return contract(g, g, space.metric)


__all__ = [
    "DERIV",
    "INDEP",
    "contract",
    "gradient",
    "lower_coordinates",
    "square_norm",
    "total_derivative",
]
