"""Line-oriented algebra definition files.

Example::

    # Poincare-type algebra on three variables
    space: x0 x1 x2 ; u
    metric: + - -
    operator D { x0: x0 ; x1: x1 ; x2: x2 }
    family P_u over k=0..3 { u: u^k }

Coefficients not listed are zero. Family members are labelled by
inserting ``^k`` before the first ``_`` of the family name (``P_u`` ->
``P^2_u``). Operators come out in file order, family members by k
ascending.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Union

from diffinv.exprcore.grammar import ParseError, parse_expr
from diffinv.jetspace.coords import Metric, SpaceSpec
from diffinv.liealg import TemplateFamily, VectorField, instantiate_family

BUILTIN_PREFIX = "builtin:"


class AlgebraFileError(ValueError):
    """Problem in an algebra file; ``line`` and ``column`` are 1-based."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class FixedOperator:
    """A single operator posing as a family, so it survives truncation scans."""

    operator: VectorField

    def members(self, K, space) -> list[VectorField]:
        return [self.operator]


Item = Union[FixedOperator, TemplateFamily]


@dataclass(frozen=True)
class AlgebraFile:
    space: SpaceSpec
    items: tuple[Item, ...]

    @property
    def families(self) -> tuple[Item, ...]:
        return self.items

    def operators(self, K: int | None = None) -> list[VectorField]:
        """All operators; ``K`` replaces the upper end of every family range."""
        return instantiate_family(self.items, K, self.space)


_NAME = r"[A-Za-z][A-Za-z0-9_{}^]*"
_OPERATOR_RE = re.compile(rf"operator\s+(?P<name>{_NAME})\s*\{{(?P<body>.*)\}}\s*\Z")
_FAMILY_RE = re.compile(
    rf"family\s+(?P<name>{_NAME})\s+over\s+(?P<param>[A-Za-z][A-Za-z0-9]*)\s*=\s*"
    r"(?P<lo>-?[0-9]+)\s*\.\.\s*(?P<hi>-?[0-9]+)\s*\{(?P<body>.*)\}\s*\Z"
)


def _strip_comment(line: str) -> str:
    i = line.find("#")
    return line if i < 0 else line[:i]


def _parse_space(rest: str, lineno: int, col: int) -> tuple[list[str], list[str]]:
    if rest.count(";") != 1:
        raise AlgebraFileError("space needs independent and dependent names separated by ';'", lineno, col)
    left, right = rest.split(";")
    indep, dep = left.split(), right.split()
    if not indep or not dep:
        raise AlgebraFileError("space needs at least one independent and one dependent name", lineno, col)
    return indep, dep


def _parse_metric(rest: str, lineno: int, col: int) -> list[int]:
    signs = []
    for tok in rest.split():
        if tok in ("+", "+1"):
            signs.append(1)
        elif tok in ("-", "-1"):
            signs.append(-1)
        else:
            raise AlgebraFileError(f"metric entries must be + or -, got {tok!r}", lineno, col + rest.find(tok))
    if not signs:
        raise AlgebraFileError("empty metric", lineno, col)
    return signs


def _parse_body(body: str, body_col: int, lineno: int, space: SpaceSpec, params: dict | None):
    """Split ``var: expr ; ...`` and check every piece; returns (var, text) pairs."""
    comps = []
    seen = set()
    offset = 0
    for piece in body.split(";"):
        start = body_col + offset
        offset += len(piece) + 1
        if not piece.strip():
            continue
        if ":" not in piece:
            raise AlgebraFileError("expected 'variable: expression'", lineno, start + len(piece) - len(piece.lstrip()))
        var, text = piece.split(":", 1)
        vcol = start + len(var) - len(var.lstrip())
        var = var.strip()
        if var not in space.indep_names and var not in space.dep_names:
            raise AlgebraFileError(f"unknown variable {var!r}", lineno, vcol)
        if var in seen:
            raise AlgebraFileError(f"coefficient of {var!r} given twice", lineno, vcol)
        seen.add(var)
        ecol = start + len(piece.split(":", 1)[0]) + 1
        try:
            e = parse_expr(text, space, params)
        except ParseError as exc:
            raise AlgebraFileError(exc.message, lineno, ecol + exc.pos) from None
        bad = [c for c in e.coords() if c.is_deriv]
        if bad:
            raise AlgebraFileError(
                f"coefficients may not depend on derivatives ({space.name(bad[0])})", lineno, ecol
            )
        comps.append((var, text.strip()))
    return comps


def parse_algebra_file(text: str) -> tuple[SpaceSpec, list[VectorField]]:
    """Parse a file; returns the space and the operators with family ranges as written."""
    alg = load_algebra(text)
    return alg.space, alg.operators()


def load_algebra(text: str) -> AlgebraFile:
    lines = text.splitlines()
    space_decl = metric_decl = None
    decls = []
    for lineno, raw in enumerate(lines, start=1):
        line = _strip_comment(raw)
        stripped = line.strip()
        if not stripped:
            continue
        col = len(line) - len(line.lstrip()) + 1
        if stripped.startswith("space:") or stripped.startswith("metric:"):
            key, rest = stripped.split(":", 1)
            rest_col = col + len(key) + 1
            if key == "space":
                if space_decl is not None:
                    raise AlgebraFileError("duplicate space declaration", lineno, col)
                space_decl = (_parse_space(rest, lineno, rest_col), lineno, col)
            else:
                if metric_decl is not None:
                    raise AlgebraFileError("duplicate metric declaration", lineno, col)
                metric_decl = (_parse_metric(rest, lineno, rest_col), lineno, col)
        elif stripped.startswith("operator") or stripped.startswith("family"):
            decls.append((lineno, col, stripped))
        else:
            word = stripped.split()[0]
            raise AlgebraFileError(f"unknown declaration {word!r}", lineno, col)
    if space_decl is None:
        raise AlgebraFileError("missing space declaration")
    (indep, dep), sl, sc = space_decl
    if metric_decl is None:
        metric = Metric.euclidean(len(indep))
    else:
        signs, ml, mc = metric_decl
        if len(signs) != len(indep):
            raise AlgebraFileError(
                f"metric has {len(signs)} entries but the space has {len(indep)} independent variables", ml, mc
            )
        metric = Metric(tuple(signs))
    try:
        space = SpaceSpec(tuple(indep), tuple(dep), metric)
    except ValueError as exc:
        raise AlgebraFileError(str(exc), sl, sc) from None

    items: list[Item] = []
    names = set()
    for lineno, col, stmt in decls:
        m = _OPERATOR_RE.match(stmt) or _FAMILY_RE.match(stmt)
        if m is None:
            kind = stmt.split()[0]
            hint = "operator NAME { var: expr ; ... }" if kind == "operator" else "family NAME over k=a..b { var: expr ; ... }"
            raise AlgebraFileError(f"malformed {kind} declaration, expected {hint}", lineno, col)
        name = m.group("name")
        if name in names:
            raise AlgebraFileError(f"duplicate name {name!r}", lineno, col + m.start("name"))
        names.add(name)
        body_col = col + m.start("body")
        if m.re is _OPERATOR_RE:
            comps = _parse_body(m.group("body"), body_col, lineno, space, None)
            X = VectorField.from_components(space, dict(comps), name)
            items.append(FixedOperator(X))
        else:
            lo, hi, param = int(m.group("lo")), int(m.group("hi")), m.group("param")
            if lo < 0 or hi < lo:
                raise AlgebraFileError(f"bad family range {lo}..{hi}", lineno, col + m.start("lo"))
            if param in space.indep_names or param in space.dep_names:
                raise AlgebraFileError(f"parameter {param!r} shadows a variable", lineno, col + m.start("param"))
            comps = None
            for k in (lo, hi):  # validate at both ends of the range
                comps = _parse_body(m.group("body"), body_col, lineno, space, {param: k})
            items.append(TemplateFamily(name, tuple(comps), lo, hi, param))
    if not items:
        raise AlgebraFileError("no operators")
    return AlgebraFile(space, tuple(items))


# -- fixtures -----------------------------------------------------------------------

def _sum_text(terms: list[tuple[int, str]]) -> str:
    out = ""
    for sign, t in terms:
        if not out:
            out = t if sign > 0 else f"-{t}"
        else:
            out += f" + {t}" if sign > 0 else f" - {t}"
    return out


def eikonal_text(n: int, K: int = 3) -> str:
    """Algebra file for the truncated Poincare-type family on n+1 variables."""
    p = n + 1
    signs = [1] + [-1] * n
    xs = [f"x{i}" for i in range(p)]
    out = [
        f"# Poincare-type family, n={n}, truncated at K={K}",
        f"space: {' '.join(xs)} ; u",
        "metric: " + " ".join("+" if s > 0 else "-" for s in signs),
    ]
    for mu in range(p):
        for nu in range(mu + 1, p):
            # u^k (x_mu d_nu - x_nu d_mu) with lowered x_mu = sign * x^mu
            a = _sum_text([(signs[mu], f"u^k*{xs[mu]}")])
            b = _sum_text([(-signs[nu], f"u^k*{xs[nu]}")])
            out.append(f"family J_{{{mu}{nu}}} over k=0..{K} {{ {xs[mu]}: {b} ; {xs[nu]}: {a} }}")
    for mu in range(p):
        out.append(f"family P_{mu} over k=0..{K} {{ {xs[mu]}: u^k }}")
    out.append(f"family P_u over k=0..{K} {{ u: u^k }}")
    return "\n".join(out) + "\n"


def classical_text(n: int) -> str:
    """Algebra file for the rotations, dilation, d_u and translations."""
    p = n + 1
    signs = [1] + [-1] * n
    xs = [f"x{i}" for i in range(p)]
    out = [
        f"# classical generating set, n={n}",
        f"space: {' '.join(xs)} ; u",
        "metric: " + " ".join("+" if s > 0 else "-" for s in signs),
    ]
    for mu in range(p):
        for nu in range(mu + 1, p):
            a = _sum_text([(signs[mu], xs[mu])])
            b = _sum_text([(-signs[nu], xs[nu])])
            out.append(f"operator J_{{{mu}{nu}}} {{ {xs[mu]}: {b} ; {xs[nu]}: {a} }}")
    out.append("operator D { " + " ; ".join(f"{x}: {x}" for x in xs) + " }")
    out.append("operator P^0_u { u: 1 }")
    for mu in range(p):
        out.append(f"operator P^0_{mu} {{ {xs[mu]}: 1 }}")
    return "\n".join(out) + "\n"


def builtin_names() -> list[str]:
    return sorted(
        f.name[: -len(".alg")] for f in resources.files("diffinv.data").iterdir() if f.name.endswith(".alg")
    )


def read_source(source: str) -> str:
    """Text of ``builtin:NAME`` or of a file path."""
    if source.startswith(BUILTIN_PREFIX):
        name = source[len(BUILTIN_PREFIX):]
        f = resources.files("diffinv.data").joinpath(f"{name}.alg")
        if not f.is_file():
            raise FileNotFoundError(f"no builtin algebra {name!r}; available: {', '.join(builtin_names())}")
        return f.read_text(encoding="utf-8")
    return Path(source).read_text(encoding="utf-8")


__all__ = [
    "AlgebraFile",
    "AlgebraFileError",
    "FixedOperator",
    "builtin_names",
    "classical_text",
    "eikonal_text",
    "load_algebra",
    "parse_algebra_file",
    "read_source",
]
