"""Exact rational expressions over jet coordinates."""

from diffinv.exprcore.expr import (
    DegeneratePoint,
    EvaluationError,
    Expr,
    arith,
    diff_partial,
    eval_at,
    pow_int,
)
from diffinv.exprcore.grammar import (
    ParseError,
    UnknownVariableError,
    parse_expr,
    print_expr,
)
from diffinv.exprcore.poly import Poly, Rat, divide_exact, poly_cofactors, poly_gcd

__all__ = [
    "DegeneratePoint",
    "EvaluationError",
    "Expr",
    "ParseError",
    "Poly",
    "Rat",
    "UnknownVariableError",
    "arith",
    "diff_partial",
    "divide_exact",
    "eval_at",
    "parse_expr",
    "poly_cofactors",
    "poly_gcd",
    "pow_int",
    "print_expr",
]
