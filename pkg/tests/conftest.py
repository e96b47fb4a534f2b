import re

import pytest
import sympy
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from diffinv.exprcore import Expr, Poly, print_expr
from diffinv.jetspace import SpaceSpec

settings.register_profile(
    "repo", deadline=None, suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large]
)
settings.load_profile("repo")


def to_sympy(e: Expr):
    """Independent reading of an Expr through its printed form."""
    text = re.sub(r"\^", "**", print_expr(e))
    return sympy.sympify(text)


@pytest.fixture
def n1():
    return SpaceSpec.eikonal(1)


@pytest.fixture
def n2():
    return SpaceSpec.eikonal(2)


# names of the coordinates up to order 1 for the n=1 space
SMALL_NAMES = ("x0", "x1", "u", "u_0", "u_1")


@st.composite
def polys(draw, space, names=SMALL_NAMES, max_terms=4, max_deg=3, coef=st.integers(-5, 5)):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        mono = tuple(sorted(draw(st.lists(st.sampled_from(names), max_size=max_deg))))
        terms[mono] = terms.get(mono, 0) + draw(coef)
    data = {}
    for mono, c in terms.items():
        exps = {}
        for name in mono:
            v = space.lookup(name)
            exps[v] = exps.get(v, 0) + 1
        key = frozenset(exps.items())
        data[key] = data.get(key, 0) + c
    return Poly.from_dict({_Mono(k): c for k, c in data.items()}, space)


class _Mono(dict):
    """Hashable exponent mapping used to feed Poly.from_dict."""

    def __init__(self, items):
        super().__init__(items)

    def __hash__(self):
        return hash(frozenset(self.items()))


@st.composite
def exprs(draw, space, rational=True, **kw):
    num = draw(polys(space, **kw))
    if not rational or not draw(st.booleans()):
        return Expr(num)
    den = draw(polys(space, **kw).filter(lambda p: not p.is_zero))
    return Expr(num, den)
