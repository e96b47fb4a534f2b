"""Jet-space coordinates, multi-indices, metrics and the variable registry."""

from __future__ import annotations

import re
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cache
from itertools import combinations_with_replacement
from math import comb
from typing import NamedTuple

INDEP, DEP, DERIV = 0, 1, 2

MultiIndex = tuple  # sorted, non-decreasing tuple of independent-variable indices

_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9]*\Z")
_JET_RE = re.compile(r"([A-Za-z][A-Za-z0-9]*)_([0-9]+)\Z")


def multi_index(*indices: int) -> MultiIndex:
    """Canonical (sorted) multi-index for a symmetric derivative."""
    return tuple(sorted(indices))


class JetCoord(NamedTuple):
    """A coordinate of jet space.

    Tuples compare as ``(kind, order, var, multi)`` which gives the
    canonical order: independents, dependents, then derivatives graded by
    order, dependent index, and lexicographic multi-index.
    """

    kind: int
    order: int
    var: int
    multi: MultiIndex = ()

    @classmethod
    def indep(cls, i: int) -> JetCoord:
        return cls(INDEP, 0, i)

    @classmethod
    def dep(cls, alpha: int = 0) -> JetCoord:
        return cls(DEP, 0, alpha)

    @classmethod
    def deriv(cls, alpha: int, indices: Sequence[int]) -> JetCoord:
        if not indices:
            return cls(DEP, 0, alpha)
        return cls(DERIV, len(indices), alpha, multi_index(*indices))

    @property
    def is_indep(self) -> bool:
        return self.kind == INDEP

    @property
    def is_dep(self) -> bool:
        return self.kind == DEP

    @property
    def is_deriv(self) -> bool:
        return self.kind == DERIV

    def shifted(self, i: int) -> JetCoord:
        """The coordinate u^alpha_{J+i}; only defined for dependent/derivative coordinates."""
        if self.kind == INDEP:
            raise ValueError("cannot shift an independent coordinate")
        return JetCoord.deriv(self.var, self.multi + (i,))


@dataclass(frozen=True)
class Metric:
    """Diagonal metric given by its signs."""

    signs: tuple[int, ...]

    def __post_init__(self):
        signs = tuple(int(s) for s in self.signs)
        if not signs:
            raise ValueError("metric must have at least one entry")
        if any(s not in (1, -1) for s in signs):
            raise ValueError(f"metric signs must be +1 or -1, got {self.signs!r}")
        object.__setattr__(self, "signs", signs)

    @classmethod
    def lorentz(cls, p: int) -> Metric:
        return cls((1,) + (-1,) * (p - 1))

    @classmethod
    def euclidean(cls, p: int) -> Metric:
        return cls((1,) * p)

    def __len__(self) -> int:
        return len(self.signs)

    def __getitem__(self, mu: int) -> int:
        return self.signs[mu]


@cache
def _coords(p: int, q: int, r: int) -> tuple[JetCoord, ...]:
    out = [JetCoord.indep(i) for i in range(p)]
    out += [JetCoord.dep(a) for a in range(q)]
    for s in range(1, r + 1):
        for a in range(q):
            out += [JetCoord(DERIV, s, a, J) for J in combinations_with_replacement(range(p), s)]
    return tuple(out)


@cache
def _index_table(p: int, q: int, r: int) -> dict[JetCoord, int]:
    return {c: i for i, c in enumerate(_coords(p, q, r))}


def jet_dimension(p: int, q: int, r: int) -> int:
    """Number of jet coordinates up to order ``r``: p + q*C(p+r, r)."""
    return p + q * comb(p + r, r)


@dataclass(frozen=True)
class SpaceSpec:
    """Independent and dependent variables of a jet space plus its metric.

    Jet coordinates are written ``<dep>_<digits>`` where the digits name
    independent-variable positions, so at most 10 independents are allowed.
    """

    indep_names: tuple[str, ...]
    dep_names: tuple[str, ...]
    metric: Metric

    def __post_init__(self):
        object.__setattr__(self, "indep_names", tuple(self.indep_names))
        object.__setattr__(self, "dep_names", tuple(self.dep_names))
        if not isinstance(self.metric, Metric):
            object.__setattr__(self, "metric", Metric(tuple(self.metric)))
        if not self.indep_names:
            raise ValueError("need at least one independent variable")
        if not self.dep_names:
            raise ValueError("need at least one dependent variable")
        if len(self.indep_names) > 10:
            raise ValueError("at most 10 independent variables are supported")
        names = self.indep_names + self.dep_names
        for name in names:
            if not _NAME_RE.match(name):
                raise ValueError(f"invalid variable name {name!r}")
        if len(set(names)) != len(names):
            raise ValueError("variable names must be distinct")
        if len(self.metric) != len(self.indep_names):
            raise ValueError(
                f"metric has {len(self.metric)} entries but there are "
                f"{len(self.indep_names)} independent variables"
            )

    @classmethod
    def standard(cls, p: int, q: int = 1, metric: Metric | None = None) -> SpaceSpec:
        """Space with independents ``x0..x{p-1}`` and dependent ``u`` (or ``u0, u1, ...``)."""
        if p < 1 or q < 1:
            raise ValueError("p and q must be positive")
        deps = ("u",) if q == 1 else tuple(f"u{a}" for a in range(q))
        return cls(
            tuple(f"x{i}" for i in range(p)),
            deps,
            metric if metric is not None else Metric.euclidean(p),
        )

    @classmethod
    def eikonal(cls, n: int) -> SpaceSpec:
        """Minkowski space with time x0, space x1..xn and one scalar u."""
        if n < 1:
            raise ValueError("n must be at least 1")
        return cls.standard(n + 1, 1, Metric.lorentz(n + 1))

    @property
    def p(self) -> int:
        return len(self.indep_names)

    @property
    def q(self) -> int:
        return len(self.dep_names)

    def coords(self, r: int) -> tuple[JetCoord, ...]:
        """All jet coordinates up to order ``r`` in canonical order."""
        if r < 0:
            raise ValueError("order must be non-negative")
        return _coords(self.p, self.q, r)

    def derivative_coords(self, r: int) -> tuple[JetCoord, ...]:
        return self.coords(r)[self.p + self.q:]

    def jet_dimension(self, r: int) -> int:
        return jet_dimension(self.p, self.q, r)

    def index(self, c: JetCoord) -> int:
        """Position of ``c`` in the canonical enumeration (stable across orders)."""
        try:
            return _index_table(self.p, self.q, c.order)[c]
        except KeyError:
            raise ValueError(f"{c!r} is not a coordinate of this space") from None

    def coord_at(self, idx: int) -> JetCoord:
        r = 0
        while self.jet_dimension(r) <= idx:
            r += 1
        return _coords(self.p, self.q, r)[idx]

    def name(self, c: JetCoord) -> str:
        if c.kind == INDEP:
            return self.indep_names[c.var]
        if c.kind == DEP:
            return self.dep_names[c.var]
        return self.dep_names[c.var] + "_" + "".join(str(i) for i in c.multi)

    def lookup(self, name: str) -> JetCoord:
        """Coordinate named ``name``; jet suffix digits may come in any order."""
        if name in self.indep_names:
            return JetCoord.indep(self.indep_names.index(name))
        if name in self.dep_names:
            return JetCoord.dep(self.dep_names.index(name))
        m = _JET_RE.match(name)
        if m and m.group(1) in self.dep_names:
            digits = [int(ch) for ch in m.group(2)]
            if all(d < self.p for d in digits):
                return JetCoord.deriv(self.dep_names.index(m.group(1)), digits)
        raise KeyError(name)

    def x(self, i: int) -> JetCoord:
        return JetCoord.indep(i)

    def u(self, *indices: int, alpha: int = 0) -> JetCoord:
        """``u(0, 1)`` is u_01; ``u()`` is the dependent variable itself."""
        return JetCoord.deriv(alpha, indices)


def enumerate_jet_coords(space: SpaceSpec, r: int) -> tuple[JetCoord, ...]:
    """Independents, dependents, then derivatives of orders 1..r."""
    return space.coords(r)
