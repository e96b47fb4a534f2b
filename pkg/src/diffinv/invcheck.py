"""Checks for absolute and relative differential invariants.

Also builds the rank-2 tensor theta of the eikonal example, its traces
S_k, and the second-order invariant basis S_k / (u.u)^(3k/2). Half-integer
powers are never formed: invariance of that quotient is equivalent to
``2*lambda_X(S_k) == 3k*lambda_X(u.u)`` for the relative multipliers.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import NamedTuple, Union

from diffinv.exprcore.expr import DegeneratePoint, Expr
from diffinv.exprcore.poly import divide_exact
from diffinv.jetspace.calculus import gradient, square_norm
from diffinv.jetspace.coords import Metric, SpaceSpec
from diffinv.liealg import (
    ProlongedField,
    VectorField,
    apply,
    build_eikonal_algebra,
    prolong,
)
from diffinv.rankcalc import (
    DEFAULT_BOUND,
    DEFAULT_POINTS,
    DegenerateSampleError,
    bareiss_rank,
    invariant_count,
    point_candidates,
)

ABSOLUTE = "absolute"
RELATIVE = "relative"
NOT_INVARIANT = "not_invariant"

Operator = Union[VectorField, ProlongedField]


@dataclass(frozen=True)
class InvariantVerdict:
    """Outcome of the Lie test for one expression.

    ``multipliers`` lists ``(label, lambda_X)`` for every operator checked
    before the verdict was reached; for an absolute invariant all are 0.
    """

    kind: str
    multipliers: tuple[tuple[str, Expr], ...] = ()
    witness: str | None = None

    @property
    def is_invariant(self) -> bool:
        return self.kind != NOT_INVARIANT

    def multiplier(self, label: str) -> Expr:
        for lab, lam in self.multipliers:
            if lab == label:
                return lam
        raise KeyError(label)


def relative_multiplier(G: Expr, F: Expr) -> Expr | None:
    """lambda with G == lambda*F when F's numerator divides G's numerator times F's denominator."""
    if G.is_zero:
        return Expr.zero(F.space)
    q = divide_exact(G.num * F.den, F.num)
    if q is None:
        return None
    return Expr(q, G.den)


def _prolonged(ops: Sequence[Operator], r: int) -> list[ProlongedField]:
    out = []
    for X in ops:
        if isinstance(X, ProlongedField):
            if X.order < r:
                raise ValueError(f"{X.label!r} is prolonged to order {X.order} < {r}")
            out.append(X)
        else:
            out.append(prolong(X, r))
    return out


def classify_invariant(
    F: Expr, operators: Sequence[Operator], r: int | None = None, space: SpaceSpec | None = None
) -> InvariantVerdict:
    """Apply each prolonged operator to F and classify the result.

    Absolute if every pr X(F) vanishes, relative if every pr X(F) is an
    exact multiple lambda_X * F, otherwise not invariant with the first
    failing operator as witness.
    """
    if F.is_zero:
        raise ValueError("the zero expression is not a meaningful invariant")
    if space is not None and F.space is not None and F.space != space:
        raise ValueError("expression lives in a different space")
    order = F.max_order() if r is None else r
    if F.max_order() > order:
        raise ValueError(f"expression has order {F.max_order()} > {order}")
    mults = []
    absolute = True
    for P in _prolonged(operators, max(order, 0)):
        lam = relative_multiplier(apply(P, F), F)
        if lam is None:
            return InvariantVerdict(NOT_INVARIANT, tuple(mults), P.label)
        absolute = absolute and lam.is_zero
        mults.append((P.label, lam))
    return InvariantVerdict(ABSOLUTE if absolute else RELATIVE, tuple(mults))


# -- the tensor theta and its traces -------------------------------------------

@dataclass(frozen=True)
class Theta:
    components: tuple[tuple[Expr, ...], ...]
    space: SpaceSpec

    def __getitem__(self, idx: tuple[int, int]) -> Expr:
        mu, nu = idx
        return self.components[mu][nu]

    def eval_values(self, values) -> list[list]:
        return [[c.eval_values(values) for c in row] for row in self.components]


def build_theta(space: SpaceSpec) -> Theta:
    """theta_{mu nu} = u_mu u_{l nu} u_l + u_nu u_{l mu} u_l - u_mu u_nu u_{ll} - u_l u_l u_{mu nu}.

    Repeated l indices are contracted with the metric of ``space``.
    """
    if space.q != 1:
        raise ValueError("theta is defined for a single dependent variable")
    p = space.p
    s = space.metric.signs
    du = gradient(space)
    hess = [[Expr.var(space.u(a, b), space) for b in range(p)] for a in range(p)]
    norm = square_norm(space)
    trace = sum((hess[l][l] if s[l] > 0 else -hess[l][l] for l in range(p)), Expr.zero(space))
    hu = []
    for nu in range(p):
        acc = Expr.zero(space)
        for l in range(p):
            t = hess[l][nu] * du[l]
            acc = acc + t if s[l] > 0 else acc - t
        hu.append(acc)
    comps = [[None] * p for _ in range(p)]
    for mu in range(p):
        for nu in range(mu, p):
            c = du[mu] * hu[nu] + du[nu] * hu[mu] - du[mu] * du[nu] * trace - norm * hess[mu][nu]
            comps[mu][nu] = comps[nu][mu] = c
    return Theta(tuple(tuple(r) for r in comps), space)


def trace_power(theta: Theta, k: int, metric: Metric | None = None) -> Expr:
    """S_k = theta_{m1 m2} theta_{m2 m3} ... theta_{mk m1}, every index contracted with the metric."""
    if k < 1:
        raise ValueError("k must be at least 1")
    metric = metric or theta.space.metric
    p = len(metric)
    s = metric.signs
    # M = theta * G, then S_k = tr(M^k)
    M = [[theta[mu, nu] if s[nu] > 0 else -theta[mu, nu] for nu in range(p)] for mu in range(p)]
    power = M
    for _ in range(k - 1):
        power = [
            [sum((power[i][l] * M[l][j] for l in range(p)), Expr.zero(theta.space)) for j in range(p)]
            for i in range(p)
        ]
    return sum((power[i][i] for i in range(p)), Expr.zero(theta.space))


class CovarianceReport(NamedTuple):
    verdicts: tuple[tuple[int, InvariantVerdict], ...]

    @property
    def ok(self) -> bool:
        return all(v.is_invariant for _, v in self.verdicts)


def verify_covariance(
    theta: Theta,
    operators: Sequence[Operator],
    space: SpaceSpec | None = None,
    k_max: int | None = None,
) -> CovarianceReport:
    """Classify S_1..S_{k_max} (default p - 1) under the order-2 prolonged operators."""
    space = space or theta.space
    k_max = space.p - 1 if k_max is None else k_max
    prolonged = _prolonged(operators, 2)
    out = []
    for k in range(1, k_max + 1):
        S = trace_power(theta, k, space.metric)
        if S.is_zero:
            out.append((k, InvariantVerdict(ABSOLUTE, tuple((P.label, S) for P in prolonged))))
        else:
            out.append((k, classify_invariant(S, prolonged, 2, space)))
    return CovarianceReport(tuple(out))


# -- functional independence --------------------------------------------------

def _gradient_rows(exprs: Sequence[Expr], space: SpaceSpec, r: int):
    coords = space.coords(r)
    return [[e.diff(c) if c in set(e.coords()) else None for c in coords] for e in exprs]


def jacobian_rank(
    exprs: Sequence[Expr],
    r: int,
    space: SpaceSpec,
    *,
    seed: int = 0,
    points: int = DEFAULT_POINTS,
    bound: int = DEFAULT_BOUND,
) -> int:
    """Maximum over sampled points of the rank of d(exprs)/d(jet coordinates up to order r)."""
    for e in exprs:
        if e.max_order() > r:
            raise ValueError(f"expression of order {e.max_order()} exceeds r={r}")
    grads = _gradient_rows(exprs, space, r)
    dim = space.jet_dimension(r)
    best = None
    for i in range(points):
        for values in point_candidates(dim, seed, i, bound):
            try:
                M = [[0 if d is None else d.eval_values(values) for d in row] for row in grads]
            except DegeneratePoint:
                continue
            rank = bareiss_rank(M)
            best = rank if best is None else max(best, rank)
            break
    if best is None:
        raise DegenerateSampleError("every sampled point was degenerate; try another seed")
    return best


def functional_independence(
    exprs: Sequence[Expr], r: int, space: SpaceSpec, seed: int = 0, **kw
) -> bool:
    if not exprs:
        raise ValueError("need at least one expression")
    return jacobian_rank(exprs, r, space, seed=seed, **kw) == len(exprs)


def _invariant_jacobian_rank(
    traces: Sequence[Expr], norm: Expr, space: SpaceSpec, *, seed: int, points: int, bound: int
) -> int:
    """Jacobian rank of S_k^2 / N^(3k), k = 1..len(traces), without forming the quotients.

    Up to the nonzero row factor S_k / N^(3k+1) the gradient of
    S_k^2/N^(3k) is 2 N grad(S_k) - 3k S_k grad(N).
    """
    coords = space.coords(2)
    dim = len(coords)
    grads = _gradient_rows(traces, space, 2)
    gnorm = _gradient_rows([norm], space, 2)[0]
    best = 0
    for i in range(points):
        values = next(point_candidates(dim, seed, i, bound))
        n = norm.eval_values(values)
        gn = [0 if d is None else d.eval_values(values) for d in gnorm]
        rows = []
        for k, (S, g) in enumerate(zip(traces, grads), start=1):
            sv = S.eval_values(values)
            rows.append(
                [2 * n * (0 if d is None else d.eval_values(values)) - 3 * k * sv * x for d, x in zip(g, gn)]
            )
        best = max(best, bareiss_rank(rows))
    return best


# -- the second-order basis -------------------------------------------------------

class IdentityFailure(NamedTuple):
    k: int
    label: str
    residual: Expr | None  # None when S_k is not even a relative invariant


@dataclass(frozen=True)
class BasisReport:
    n: int
    K: int
    n_operators: int
    checks: int
    failures: tuple[IdentityFailure, ...]
    norm_multipliers: tuple[tuple[str, Expr], ...]
    traces_independent: bool
    invariants_independent: bool
    invariant_count: int
    absolute_count: int
    covariance: CovarianceReport = field(repr=False)

    @property
    def identities_ok(self) -> bool:
        return not self.failures

    @property
    def count_ok(self) -> bool:
        return self.invariant_count == self.n

    @property
    def ok(self) -> bool:
        return (
            self.identities_ok
            and self.traces_independent
            and self.invariants_independent
            and self.count_ok
            and self.absolute_count == self.invariant_count
        )


def verify_basis(
    n: int,
    K: int,
    *,
    seed: int = 0,
    points: int = DEFAULT_POINTS,
    bound: int = DEFAULT_BOUND,
) -> BasisReport:
    """Check that S_k / (u.u)^(3k/2), k = 1..n, are absolute invariants of the truncated family.

    For every operator X the multiplier identity 2 lambda_X(S_k) = 3k lambda_X(u.u)
    is checked exactly; independence is checked on sampled Jacobians, and
    the number of invariants is compared with the rank count.
    """
    if n < 1 or K < 0:
        raise ValueError("need n >= 1 and K >= 0")
    ops = build_eikonal_algebra(n, K)
    space = ops[0].space
    prolonged = [prolong(X, 2) for X in ops]
    norm = square_norm(space)
    verdict = classify_invariant(norm, prolonged, 2, space)
    if not verdict.is_invariant:
        raise AssertionError(f"u.u is not a relative invariant (witness {verdict.witness})")
    lam_norm = dict(verdict.multipliers)
    theta = build_theta(space)
    traces = [trace_power(theta, k) for k in range(1, n + 1)]
    failures = []
    verdicts = []
    checks = 0
    absolute = 0
    for k, S in enumerate(traces, start=1):
        v = classify_invariant(S, prolonged, 2, space)
        verdicts.append((k, v))
        before = len(failures)
        lam_S = dict(v.multipliers)
        for P in prolonged:
            checks += 1
            if P.label not in lam_S:
                failures.append(IdentityFailure(k, P.label, None))
                continue
            residual = lam_S[P.label] * 2 - lam_norm[P.label] * (3 * k)
            if not residual.is_zero:
                failures.append(IdentityFailure(k, P.label, residual))
        if len(failures) == before:
            absolute += 1
    kw = dict(seed=seed, points=points, bound=bound)
    return BasisReport(
        n=n,
        K=K,
        n_operators=len(ops),
        checks=checks,
        failures=tuple(failures),
        norm_multipliers=tuple(verdict.multipliers),
        traces_independent=functional_independence(traces, 2, space, **kw),
        invariants_independent=_invariant_jacobian_rank(traces, norm, space, **kw) == n,
        invariant_count=invariant_count(ops, 2, space, **kw),
        absolute_count=absolute,
        covariance=CovarianceReport(tuple(verdicts)),
    )


__all__ = [
    "ABSOLUTE",
    "NOT_INVARIANT",
    "RELATIVE",
    "BasisReport",
    "CovarianceReport",
    "InvariantVerdict",
    "Theta",
    "build_theta",
    "classify_invariant",
    "functional_independence",
    "jacobian_rank",
    "relative_multiplier",
    "trace_power",
    "verify_basis",
    "verify_covariance",
]
