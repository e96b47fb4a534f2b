import random

import pytest
import sympy

from diffinv.exprcore import Expr, parse_expr
from diffinv.invcheck import (
    ABSOLUTE,
    NOT_INVARIANT,
    RELATIVE,
    build_theta,
    classify_invariant,
    functional_independence,
    jacobian_rank,
    trace_power,
    verify_basis,
    verify_covariance,
)
from diffinv.jetspace import Metric, SpaceSpec, square_norm
from diffinv.liealg import (
    OperatorFamily,
    VectorField,
    apply,
    build_eikonal_algebra,
    commutator,
    prolong,
)


def field(space, label="", **comps):
    return VectorField.from_components(space, comps, label)


def values_at(space, r, assign):
    vals = [0] * space.jet_dimension(r)
    for name, v in assign.items():
        vals[space.index(space.lookup(name))] = v
    return vals


# -- classification ---------------------------------------------------------------

def test_norm_is_relative_for_full_family():
    sp = SpaceSpec.eikonal(3)
    v = classify_invariant(square_norm(sp), build_eikonal_algebra(3, 3), 1, sp)
    assert v.kind == RELATIVE
    assert v.multiplier("P^1_u") == 2
    assert v.multiplier("J^0_{01}").is_zero


def test_norm_under_scaling_alone():
    sp = SpaceSpec.eikonal(2)
    v = classify_invariant(square_norm(sp), [field(sp, "u d_u", u="u")], 1, sp)
    assert v.kind == RELATIVE
    assert v.multipliers == (("u d_u", Expr.const(2, sp)),)


def test_translations_leave_first_derivatives_alone():
    sp = SpaceSpec.eikonal(2)
    v = classify_invariant(parse_expr("u_0", sp), OperatorFamily("translation").members(0, sp), 1, sp)
    assert v.kind == ABSOLUTE


def test_not_invariant_names_first_failing_operator():
    sp = SpaceSpec.eikonal(2)
    ops = build_eikonal_algebra(2, 3)
    v = classify_invariant(parse_expr("u_0", sp), ops, 1, sp)
    assert v.kind == NOT_INVARIANT and v.witness == "J^0_{01}"
    v = classify_invariant(parse_expr("u_0^2", sp), [field(sp, "T", x0="1"), field(sp, "B", u="x0")], 1, sp)
    assert v.kind == NOT_INVARIANT and v.witness == "B"
    assert len(v.multipliers) == 1


def test_constant_is_absolute_and_zero_is_rejected():
    sp = SpaceSpec.eikonal(1)
    assert classify_invariant(Expr.const(1, sp), build_eikonal_algebra(1, 2), 1, sp).kind == ABSOLUTE
    with pytest.raises(ValueError):
        classify_invariant(Expr.zero(sp), [], 1, sp)
    with pytest.raises(ValueError):
        classify_invariant(parse_expr("u_00", sp), [], 1, sp)


def test_rational_invariant():
    sp = SpaceSpec.eikonal(1)
    # homogeneous of degree zero in u and its derivatives
    F = parse_expr("u_0/u_1", sp)
    assert classify_invariant(F, [field(sp, u="u"), field(sp, x0="1")], 1, sp).kind == ABSOLUTE


def test_scaling_F_keeps_verdict():
    sp = SpaceSpec.eikonal(2)
    ops = build_eikonal_algebra(2, 2)
    F = square_norm(sp)
    a = classify_invariant(F, ops, 1, sp)
    for c in (3, -1, sympy.Rational(2, 7)):
        b = classify_invariant(F * Expr.const(str(c), sp), ops, 1, sp)
        assert a == b


# -- theta and traces ----------------------------------------------------------------

def theta_oracle(n, point):
    """Direct transcription of the tensor with sympy, at a point {name: value}."""
    p = n + 1
    s = [1] + [-1] * n
    u = [sympy.Integer(point.get(f"u_{m}", 0)) for m in range(p)]

    def H(a, b):
        a, b = min(a, b), max(a, b)
        return sympy.Integer(point.get(f"u_{a}{b}", 0))

    def lam_sum(f):
        return sum(s[l] * f(l) for l in range(p))

    N = lam_sum(lambda l: u[l] * u[l])
    T = lam_sum(lambda l: H(l, l))
    th = sympy.zeros(p, p)
    for m in range(p):
        for v in range(p):
            th[m, v] = (
                u[m] * lam_sum(lambda l: H(l, v) * u[l])
                + u[v] * lam_sum(lambda l: H(l, m) * u[l])
                - u[m] * u[v] * T
                - N * H(m, v)
            )
    return th, sympy.diag(*s)


def test_theta_vanishes_without_second_derivatives():
    sp = SpaceSpec.eikonal(2)
    th = build_theta(sp)
    vals = values_at(sp, 2, {"u_0": 3, "u_1": -2, "u_2": 5, "x0": 7})
    assert all(x == 0 for row in th.eval_values(vals) for x in row)


def test_theta_is_symmetric():
    th = build_theta(SpaceSpec.eikonal(3))
    for m in range(4):
        for v in range(4):
            assert th[m, v] == th[v, m]


def test_theta_by_hand_n1():
    sp = SpaceSpec.eikonal(1)
    vals = values_at(sp, 2, {"u_0": 1, "u_11": 1})
    th = build_theta(sp)
    assert th.eval_values(vals) == [[1, 0], [0, -1]]
    assert trace_power(th, 1).eval_values(vals) == 2
    assert trace_power(th, 2).eval_values(vals) == 2


def test_theta_and_traces_match_matrix_oracle():
    rng = random.Random(4)
    for n in (1, 2, 3):
        sp = SpaceSpec.eikonal(n)
        th = build_theta(sp)
        S = [trace_power(th, k) for k in range(1, n + 2)]
        for _ in range(3):
            point = {sp.name(c): rng.randint(-9, 9) for c in sp.derivative_coords(2)}
            vals = values_at(sp, 2, point)
            ref, G = theta_oracle(n, point)
            assert sympy.Matrix(th.eval_values(vals)) == ref
            for k, Sk in enumerate(S, start=1):
                assert Sk.eval_values(vals) == ((ref * G) ** k).trace()


def test_trace_power_of_zero_and_k1():
    sp = SpaceSpec.eikonal(2)
    th = build_theta(sp)
    zero = type(th)(tuple(tuple(Expr.zero(sp) for _ in range(3)) for _ in range(3)), sp)
    assert all(trace_power(zero, k).is_zero for k in (1, 2, 3))
    assert trace_power(th, 1) == th[0, 0] - th[1, 1] - th[2, 2]
    with pytest.raises(ValueError):
        trace_power(th, 0)


def test_theta_needs_one_dependent_variable():
    with pytest.raises(ValueError):
        build_theta(SpaceSpec.standard(2, 2))


# -- covariance and basis -------------------------------------------------------------------

def test_covariance_full_family_n2():
    sp = SpaceSpec.eikonal(2)
    rep = verify_covariance(build_theta(sp), build_eikonal_algebra(2, 3), sp)
    assert rep.ok
    assert [(k, v.kind) for k, v in rep.verdicts] == [(1, RELATIVE), (2, RELATIVE)]


def test_covariance_rotations_only_is_absolute():
    sp = SpaceSpec.eikonal(3)
    rot = OperatorFamily("rotation").members(0, sp)
    rep = verify_covariance(build_theta(sp), rot, sp)
    assert all(v.kind == ABSOLUTE for _, v in rep.verdicts)


def test_covariance_empty_operator_set():
    sp = SpaceSpec.eikonal(2)
    rep = verify_covariance(build_theta(sp), [], sp)
    assert all(v.kind == ABSOLUTE for _, v in rep.verdicts)


def test_covariance_euclidean_rotations():
    sp = SpaceSpec.standard(3, metric=Metric.euclidean(3))
    rot = OperatorFamily("rotation").members(0, sp)
    rep = verify_covariance(build_theta(sp), rot, sp, k_max=3)
    assert all(v.kind == ABSOLUTE for _, v in rep.verdicts)


def test_covariance_detects_a_breaking_operator():
    sp = SpaceSpec.eikonal(2)
    rep = verify_covariance(build_theta(sp), [field(sp, "bad", u="x0")], sp)
    assert not rep.ok
    assert rep.verdicts[0][1].witness == "bad"


@pytest.mark.parametrize("n", [2, 3])
def test_verify_basis(n):
    rep = verify_basis(n, 3)
    assert rep.identities_ok and rep.checks == n * rep.n_operators
    assert rep.traces_independent and rep.invariants_independent
    assert rep.invariant_count == n
    assert rep.absolute_count == rep.invariant_count
    assert rep.ok


def test_verify_basis_classical_subcase():
    rep = verify_basis(1, 0)
    assert rep.identities_ok and rep.absolute_count == 1


def test_verify_basis_rejects_bad_arguments():
    with pytest.raises(ValueError):
        verify_basis(0, 3)


# -- functional independence -----------------------------------------------------------------

def test_functional_independence_examples():
    sp = SpaceSpec.eikonal(1)
    u0, u1 = parse_expr("u_0", sp), parse_expr("u_1", sp)
    assert functional_independence([u0, u1], 1, sp)
    assert not functional_independence([u0, u0 * 2], 1, sp)
    assert not functional_independence([u0, u1, u0 * u1], 1, sp)
    sp2 = SpaceSpec.eikonal(2)
    th = build_theta(sp2)
    assert functional_independence([trace_power(th, 1), trace_power(th, 2)], 2, sp2)
    assert jacobian_rank([square_norm(sp2)], 1, sp2) == 1
    with pytest.raises(ValueError):
        functional_independence([], 1, sp)


# -- properties ------------------------------------------------------------------------------

@pytest.mark.parametrize("F_kind", ["norm", "S1"])
def test_multiplier_additivity(F_kind):
    sp = SpaceSpec.eikonal(2)
    ops = build_eikonal_algebra(2, 2)
    r = 1 if F_kind == "norm" else 2
    F = square_norm(sp) if F_kind == "norm" else trace_power(build_theta(sp), 1)
    rng = random.Random(9)
    for _ in range(10):
        X, Y = rng.choice(ops), rng.choice(ops)
        PX, PY = prolong(X, r), prolong(Y, r)
        lx = classify_invariant(F, [PX], r, sp).multipliers[0][1]
        ly = classify_invariant(F, [PY], r, sp).multipliers[0][1]
        lz = classify_invariant(F, [commutator(X, Y)], r, sp).multipliers[0][1]
        assert lz == apply(PX, ly) - apply(PY, lx)
