"""Generic rank of prolonged operator systems.

The generic rank of the matrix of prolonged coefficients is estimated by
evaluating it exactly at random integer points of jet space; by the
Schwartz-Zippel lemma a random point attains the generic rank with high
probability, and exact arithmetic removes any numerical ambiguity.
Each point index draws from its own seeded generator, so results do not
depend on evaluation order.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import NamedTuple

import numpy as np

from diffinv.exprcore.expr import DegeneratePoint
from diffinv.jetspace.coords import SpaceSpec
from diffinv.liealg import (
    Family,
    ProlongedField,
    VectorField,
    instantiate_family,
    prolong,
)

DEFAULT_POINTS = 3
DEFAULT_BOUND = 10**6
MAX_RESAMPLES = 20


class DegenerateSampleError(RuntimeError):
    """Every sampled point made some coefficient denominator vanish."""


@dataclass(frozen=True)
class RankQuery:
    operators: tuple[VectorField, ...]
    order: int
    space: SpaceSpec
    points: int = DEFAULT_POINTS
    seed: int = 0
    bound: int = DEFAULT_BOUND

    def __post_init__(self):
        object.__setattr__(self, "operators", tuple(self.operators))
        if self.points < 1:
            raise ValueError("need at least one evaluation point")
        if self.bound < 2:
            raise ValueError("coordinate bound must be at least 2")
        if self.order < 0:
            raise ValueError("order must be non-negative")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass(frozen=True)
class RankReport:
    rank: int
    jet_dimension: int
    point_ranks: tuple[int, ...]
    seed: int
    order: int
    n_operators: int
    invariant_count: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "invariant_count", self.jet_dimension - self.rank)

    @property
    def consistent(self) -> bool:
        """All evaluation points gave the same rank."""
        return len(set(self.point_ranks)) <= 1

    def line(self) -> str:
        ranks = ",".join(str(r) for r in self.point_ranks)
        return (
            f"rank={self.rank} jet_dim={self.jet_dimension} invariants={self.invariant_count} "
            f"operators={self.n_operators} order={self.order} point_ranks={ranks} seed={self.seed}"
        )


# -- exact linear algebra -------------------------------------------------------

def _integral(row: Sequence) -> list[int]:
    den = 1
    for x in row:
        if type(x) is not int:
            den = lcm(den, Fraction(x).denominator)
    if den == 1:
        return [int(x) for x in row]
    return [int(x * den) for x in row]


def bareiss_rank(matrix: Sequence[Sequence]) -> int:
    """Rank of a rational matrix by fraction-free (Bareiss) elimination."""
    M = [_integral(r) for r in matrix]
    if not M:
        return 0
    nrows, ncols = len(M), len(M[0])
    rank = 0
    prev = 1
    for col in range(ncols):
        if rank == nrows:
            break
        piv = next((i for i in range(rank, nrows) if M[i][col]), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        prow = M[rank]
        p = prow[col]
        for i in range(rank + 1, nrows):
            row = M[i]
            c = row[col]
            for j in range(col + 1, ncols):
                row[j] = (row[j] * p - c * prow[j]) // prev
            row[col] = 0
        prev = p
        rank += 1
    return rank


class Echelon:
    """Incrementally grown row echelon form over the integers."""

    def __init__(self):
        self.rows: list[tuple[int, list[int]]] = []

    def __len__(self) -> int:
        return len(self.rows)

    def reduce(self, row: Sequence) -> list[int]:
        r = _integral(row)
        for pc, prow in self.rows:
            c = r[pc]
            if c:
                p = prow[pc]
                r = [x * p - c * y for x, y in zip(r, prow)]
                g = reduce(gcd, r)
                if g > 1:
                    r = [x // g for x in r]
        return r

    def is_independent(self, row: Sequence) -> bool:
        return any(self.reduce(row))

    def add(self, row: Sequence) -> bool:
        r = self.reduce(row)
        for j, x in enumerate(r):
            if x:
                self.rows.append((j, r))
                return True
        return False


# -- sampling -------------------------------------------------------------------

def point_candidates(dim: int, seed: int, index: int, bound: int = DEFAULT_BOUND):
    """Candidate integer points in [-bound, bound]^dim for one point index.

    The first candidate is the point itself; the following ones are the
    resamples used when a point turns out degenerate.
    """
    rng = np.random.default_rng([seed, index])
    for _ in range(MAX_RESAMPLES + 1):
        draw = rng.integers(-bound, bound, size=dim, endpoint=True)
        yield tuple(int(v) for v in draw)


class _Engine:
    """Shared sampling and caching for one space, order and seed."""

    def __init__(self, space: SpaceSpec, order: int, points: int, seed: int, bound: int):
        self.space = space
        self.order = order
        self.points = points
        self.seed = seed
        self.bound = bound
        self.dim = space.jet_dimension(order)
        self._prolonged: dict[VectorField, ProlongedField] = {}
        self._rows: dict[tuple[VectorField, tuple[int, ...]], list] = {}

    def prolonged(self, X: VectorField) -> ProlongedField:
        P = self._prolonged.get(X)
        if P is None:
            if X.space != self.space:
                raise ValueError(f"operator {X.label!r} lives in a different space")
            P = self._prolonged[X] = prolong(X, self.order)
        return P

    def candidates(self, index: int):
        return point_candidates(self.dim, self.seed, index, self.bound)

    def row(self, X: VectorField, values: tuple[int, ...]) -> list:
        key = (X, values)
        r = self._rows.get(key)
        if r is None:
            r = self._rows[key] = [e.eval_values(values) for e in self.prolonged(X).row()]
        return r

    def sample(self, operators: Sequence[VectorField]) -> list[tuple[tuple[int, ...], list[list]]]:
        """Per point index: the accepted point and the evaluated matrix."""
        out = []
        for i in range(self.points):
            for values in self.candidates(i):
                try:
                    rows = [self.row(X, values) for X in operators]
                except DegeneratePoint:
                    continue
                out.append((values, rows))
                break
        if not out:
            raise DegenerateSampleError(
                f"all {self.points} sample points were degenerate after {MAX_RESAMPLES} "
                f"resamples each; try another seed (current seed {self.seed})"
            )
        return out

    def report(self, operators: Sequence[VectorField], sampled=None) -> RankReport:
        if sampled is None:
            sampled = self.sample(operators)
        ranks = tuple(bareiss_rank(rows) if rows else 0 for _, rows in sampled)
        return RankReport(
            rank=max(ranks),
            jet_dimension=self.dim,
            point_ranks=ranks,
            seed=self.seed,
            order=self.order,
            n_operators=len(operators),
        )


def _engine(space, order, points, seed, bound) -> _Engine:
    RankQuery((), order, space, points, seed, bound)  # validation only
    return _Engine(space, order, points, seed, bound)


# -- public operations ----------------------------------------------------------

def prolonged_matrix_at(
    operators: Sequence[VectorField], r: int, space: SpaceSpec, point
) -> list[list[Fraction]]:
    """Exact matrix of order-r prolonged coefficients at ``point``.

    ``point`` is a mapping from JetCoord to value or a sequence in canonical
    coordinate order; columns follow :func:`enumerate_jet_coords`.
    """
    coords = space.coords(r)
    if isinstance(point, dict):
        values = tuple(Fraction(point[c]) for c in coords)
    else:
        values = tuple(Fraction(v) for v in point)
        if len(values) != len(coords):
            raise ValueError(f"point has {len(values)} values, expected {len(coords)}")
    values = tuple(v.numerator if v.denominator == 1 else v for v in values)
    out = []
    for X in operators:
        P = prolong(X, r)
        out.append([Fraction(e.eval_values(values)) for e in P.row()])
    return out


def generic_rank(query: RankQuery) -> RankReport:
    eng = _Engine(query.space, query.order, query.points, query.seed, query.bound)
    return eng.report(query.operators)


def rank_report(
    operators: Sequence[VectorField],
    r: int,
    space: SpaceSpec,
    *,
    points: int = DEFAULT_POINTS,
    seed: int = 0,
    bound: int = DEFAULT_BOUND,
) -> RankReport:
    return generic_rank(RankQuery(tuple(operators), r, space, points, seed, bound))


def invariant_count(operators: Sequence[VectorField], r: int, space: SpaceSpec, **kw) -> int:
    """Jet dimension minus generic rank: the number of functionally independent invariants."""
    return rank_report(operators, r, space, **kw).invariant_count


def rank_increase(
    operators: Sequence[VectorField],
    extra: Sequence[VectorField],
    r: int,
    space: SpaceSpec,
    *,
    points: int = DEFAULT_POINTS,
    seed: int = 0,
    bound: int = DEFAULT_BOUND,
) -> tuple[RankReport, RankReport]:
    """Reports for ``operators`` and ``operators + extra`` at the same points."""
    eng = _engine(space, r, points, seed, bound)
    ops = list(operators)
    both = ops + list(extra)
    sampled = eng.sample(both)
    base = [(v, rows[: len(ops)]) for v, rows in sampled]
    return eng.report(ops, base), eng.report(both, sampled)


class ScanResult(NamedTuple):
    ranks: tuple[tuple[int, int], ...]
    stable_from: int
    jet_dimension: int

    @property
    def final_rank(self) -> int:
        return self.ranks[-1][1]


def stabilization_scan(
    families: Iterable[Family],
    r: int,
    space: SpaceSpec,
    K_max: int,
    *,
    points: int = DEFAULT_POINTS,
    seed: int = 0,
    bound: int = DEFAULT_BOUND,
) -> ScanResult:
    """Generic rank for truncation orders K = 0..K_max.

    ``stable_from`` is the smallest K after which the rank stays constant
    through ``K_max``.
    """
    if K_max < 0:
        raise ValueError("K_max must be non-negative")
    families = list(families)
    eng = _engine(space, r, points, seed, bound)
    ranks = []
    for K in range(K_max + 1):
        ops = instantiate_family(families, K, space)
        ranks.append((K, eng.report(ops).rank))
    stable = K_max
    while stable > 0 and ranks[stable - 1][1] == ranks[-1][1]:
        stable -= 1
    return ScanResult(tuple(ranks), stable, eng.dim)


def find_generating_set(
    operators: Sequence[VectorField],
    r: int,
    space: SpaceSpec,
    *,
    points: int = DEFAULT_POINTS,
    seed: int = 0,
    bound: int = DEFAULT_BOUND,
) -> list[VectorField]:
    """Greedy forward selection in the given order.

    An operator is kept iff it raises the rank (maximum over the sampled
    points) of the operators kept so far. The result is greedy-minimal, not
    necessarily of minimum size.
    """
    ops = list(operators)
    if not ops:
        return []
    eng = _engine(space, r, points, seed, bound)
    sampled = eng.sample(ops)
    echelons = [Echelon() for _ in sampled]
    chosen = []
    best = 0
    for k, X in enumerate(ops):
        indep = [ech.is_independent(rows[k]) for ech, (_, rows) in zip(echelons, sampled)]
        new_best = max(len(ech) + int(f) for ech, f in zip(echelons, indep))
        if new_best > best:
            for ech, f, (_, rows) in zip(echelons, indep, sampled):
                if f:
                    ech.add(rows[k])
            chosen.append(X)
            best = new_best
    return chosen


class GeneratingSetCheck(NamedTuple):
    equal: bool
    candidate: RankReport
    reference: RankReport


def verify_generating_set(
    candidate: Sequence[VectorField],
    reference: Sequence[VectorField],
    r: int,
    space: SpaceSpec,
    *,
    points: int = DEFAULT_POINTS,
    seed: int = 0,
    bound: int = DEFAULT_BOUND,
) -> GeneratingSetCheck:
    """Compare generic ranks of ``candidate`` and ``reference`` at shared points."""
    eng = _engine(space, r, points, seed, bound)
    cand, ref = list(candidate), list(reference)
    sampled = eng.sample(cand + ref)
    rc = eng.report(cand, [(v, rows[: len(cand)]) for v, rows in sampled])
    rr = eng.report(ref, [(v, rows[len(cand):]) for v, rows in sampled])
    return GeneratingSetCheck(rc.rank == rr.rank, rc, rr)
