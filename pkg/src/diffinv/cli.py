"""Command line front end.

Every command prints machine lines prefixed ``#?`` (space separated
``key=value``) followed by a short human summary. Exit codes: 0 success,
1 a checked claim failed, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import sys
from collections.abc import Sequence

from diffinv import __version__
from diffinv.algfile import (
    AlgebraFileError,
    classical_text,
    eikonal_text,
    load_algebra,
    read_source,
)
from diffinv.exprcore import ParseError, parse_expr
from diffinv.invcheck import (
    ABSOLUTE,
    NOT_INVARIANT,
    RELATIVE,
    classify_invariant,
    verify_basis,
)
from diffinv.jetspace import SpaceSpec, square_norm
from diffinv.liealg import (
    build_classical_generating_set,
    build_eikonal_algebra,
    dilation,
    labels,
)
from diffinv.rankcalc import (
    DEFAULT_BOUND,
    DEFAULT_POINTS,
    DegenerateSampleError,
    find_generating_set,
    rank_increase,
    rank_report,
    stabilization_scan,
    verify_generating_set,
)

DEFAULT_K = 3

EXIT_OK = 0
EXIT_CLAIM = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(_fmt(v) for v in value)
    s = str(value)
    return s.replace(" ", "")


class Report:
    """Collects output so nothing is written until the command finishes."""

    def __init__(self, command: str, **echo):
        self.machine: list[str] = []
        self.human: list[str] = []
        self.line(command=command, **echo)

    def line(self, **kv) -> None:
        self.machine.append("#? " + " ".join(f"{k}={_fmt(v)}" for k, v in kv.items()))

    def say(self, text: str) -> None:
        self.human.append(text)

    def render(self) -> str:
        return "\n".join(self.machine + self.human) + "\n"


def _load(source: str):
    try:
        text = read_source(source)
    except OSError as exc:
        raise UsageError(f"cannot read {source}: {exc}") from None
    try:
        return load_algebra(text)
    except AlgebraFileError as exc:
        raise UsageError(f"{source}: {exc}") from None


def _common(args) -> dict:
    return dict(points=args.points, seed=args.seed, bound=args.bound)


def _truncation(args):
    return "file" if args.truncation is None else args.truncation


def _echo(args) -> dict:
    return dict(points=args.points, bound=args.bound, seed=args.seed)


# -- commands ------------------------------------------------------------------------

def cmd_rank(args) -> tuple[Report, int]:
    alg = _load(args.file)
    ops = alg.operators(args.truncation)
    rep = Report("rank", file=args.file, order=args.order, truncation=_truncation(args), **_echo(args))
    rr = rank_report(ops, args.order, alg.space, **_common(args))
    rep.machine.append("#? " + rr.line())
    rep.say(
        f"{len(ops)} operators, order {args.order}: generic rank {rr.rank} of {rr.jet_dimension}, "
        f"{rr.invariant_count} functionally independent invariants"
    )
    if not rr.consistent:
        rep.say("note: sample points disagree; the maximum is reported")
    return rep, EXIT_OK


def cmd_genset(args) -> tuple[Report, int]:
    alg = _load(args.file)
    ops = alg.operators(args.truncation)
    rep = Report("genset", file=args.file, order=args.order, truncation=_truncation(args), **_echo(args))
    chosen = find_generating_set(ops, args.order, alg.space, **_common(args))
    rr = rank_report(chosen, args.order, alg.space, **_common(args))
    rep.line(size=len(chosen), rank=rr.rank, labels=labels(chosen))
    rep.say(f"greedy generating set of {len(chosen)} out of {len(ops)} operators reaches rank {rr.rank}")
    code = EXIT_OK
    if args.verify_against:
        ref = _load(args.verify_against)
        if ref.space != alg.space:
            raise UsageError("--verify-against file declares a different space")
        check = verify_generating_set(ops, ref.operators(args.truncation), args.order, alg.space, **_common(args))
        rep.line(
            verify_against=args.verify_against,
            equal_rank=check.equal,
            rank=check.candidate.rank,
            reference_rank=check.reference.rank,
        )
        rep.say(
            f"all operators of {args.file} vs {args.verify_against}: rank {check.candidate.rank} vs "
            f"{check.reference.rank} ({'equal' if check.equal else 'different'})"
        )
        if not check.equal:
            code = EXIT_CLAIM
    return rep, code


def cmd_check(args) -> tuple[Report, int]:
    alg = _load(args.file)
    try:
        F = parse_expr(args.expr, alg.space)
    except ParseError as exc:
        raise UsageError(f"--expr: {exc}") from None
    if F.is_zero:
        raise UsageError("--expr: the zero expression cannot be classified")
    order = F.max_order() if args.order is None else args.order
    if F.max_order() > order:
        raise UsageError(f"--expr has order {F.max_order()} > --order {order}")
    ops = alg.operators(args.truncation)
    rep = Report("check", file=args.file, expr=args.expr, order=order, mode=args.mode or "none")
    v = classify_invariant(F, ops, order, alg.space)
    if v.kind == NOT_INVARIANT:
        rep.line(verdict=v.kind, witness=v.witness)
    else:
        rep.line(verdict=v.kind, operators=len(ops))
        for lab, lam in v.multipliers:
            if not lam.is_zero:
                rep.line(operator=lab, multiplier=str(lam))
    rep.say(f"{args.expr}: {v.kind.replace('_', ' ')}" + (f" (fails for {v.witness})" if v.witness else ""))
    code = EXIT_OK
    if args.mode == ABSOLUTE and v.kind != ABSOLUTE or args.mode == RELATIVE and v.kind == NOT_INVARIANT:
        code = EXIT_CLAIM
    return rep, code


def cmd_scan(args) -> tuple[Report, int]:
    alg = _load(args.file)
    rep = Report("scan", file=args.file, order=args.order, Kmax=args.Kmax, **_echo(args))
    res = stabilization_scan(alg.items, args.order, alg.space, args.Kmax, **_common(args))
    for K, r in res.ranks:
        rep.line(K=K, rank=r, jet_dim=res.jet_dimension, invariants=res.jet_dimension - r)
    rep.line(stable_from=res.stable_from, final_rank=res.final_rank)
    rep.say(f"rank constant at {res.final_rank} from K={res.stable_from} through K={args.Kmax}")
    return rep, EXIT_OK


def cmd_fixture(args) -> tuple[Report | None, int]:
    if args.name == "eikonal":
        sys.stdout.write(eikonal_text(args.n, args.K))
    else:
        sys.stdout.write(classical_text(args.n))
    return None, EXIT_OK


def cmd_eikonal_demo(args) -> tuple[Report, int]:
    n, K = args.n, args.K
    if n < 1:
        raise UsageError("--n must be at least 1")
    if K < 0:
        raise UsageError("--K must be non-negative")
    if args.order not in (1, 2):
        raise UsageError("--order must be 1 or 2")
    kw = _common(args)
    rep = Report("eikonal-demo", n=n, K=K, order=args.order, **_echo(args))
    space = SpaceSpec.eikonal(n)
    ops = build_eikonal_algebra(n, K)
    full = K >= 1  # K = 0 is the classical sub-algebra; rank claims refer to the full family
    failed = []

    def claim(name: str, ok: bool | None, **kv):
        status = "skip" if ok is None else ("pass" if ok else "fail")
        rep.line(check=name, status=status, **kv)
        if ok is False:
            failed.append(name)

    # steps 1-3: truncated family and its first prolongation
    rep.line(operators=len(ops), jet_dim1=space.jet_dimension(1), jet_dim2=space.jet_dimension(2))
    r1 = rank_report(ops, 1, space, **kw)
    rep.line(rank_order1=r1.rank, invariants_order1=r1.invariant_count, expected_rank=2 * n + 3)
    claim("rank_order1", r1.rank == 2 * n + 3 if full else None)
    claim("no_absolute_order1", r1.invariant_count == 0 if full else None)

    norm = square_norm(space)
    v = classify_invariant(norm, ops, 1, space)
    mult = dict(v.multipliers).get("P^1_u")
    claim("relative_norm", v.kind == RELATIVE if full else v.is_invariant, verdict=v.kind)
    if mult is not None:
        claim("multiplier_u_du", mult == 2, multiplier=str(mult))

    base, ext = rank_increase(ops, [dilation(space)], 1, space, **kw)
    claim("dilation_span", ext.rank == base.rank if full else None, rank_with_D=ext.rank)

    # step 5: generating sets
    classical = build_classical_generating_set(n)
    chk = verify_generating_set(classical, ops, 1, space, **kw)
    claim("classical_genset", chk.equal if full else None, classical_rank=chk.candidate.rank)
    # reported only: the classical set has C(n+1,2)+n+3 members, which equals 2n+3 only for n=1
    rep.line(classical_size=len(classical), classical_size_equals_rank=len(classical) == 2 * n + 3)
    greedy = find_generating_set(ops, 1, space, **kw)
    rep.line(greedy_size=len(greedy), greedy=labels(greedy))

    # step 6: second order
    if args.order >= 2:
        # verify_basis classifies every S_k, which doubles as the covariance check
        basis = verify_basis(n, K, **kw)
        for k, verdict in basis.covariance.verdicts:
            claim(f"covariant_S{k}", verdict.is_invariant, verdict=verdict.kind)
        for f in basis.failures[:5]:
            rep.line(identity_failure=f.k, operator=f.label, residual=str(f.residual))
        claim("multiplier_identities", basis.identities_ok, checked=basis.checks)
        claim("traces_independent", basis.traces_independent)
        claim("basis_independent", basis.invariants_independent)
        rep.line(invariants_order2=basis.invariant_count, absolute_found=basis.absolute_count)
        claim("count_order2", basis.count_ok if full else None)
        claim("basis_complete", basis.absolute_count == basis.invariant_count if full else None)

    rep.line(result="pass" if not failed else "fail", failed=failed or "none")
    rep.say(f"Poincare-type family, n={n}, K={K}: {len(ops)} operators")
    rep.say(
        f"first prolongation rank {r1.rank} (2n+3 = {2 * n + 3}), {r1.invariant_count} first-order invariants"
    )
    if args.order >= 2:
        rep.say(
            f"second order: {basis.invariant_count} invariants, S_k/(u.u)^(3k/2) for k=1..{n} "
            f"verified absolute on {basis.absolute_count} of {n}"
        )
    rep.say(
        "analytic coefficients add no rank: every Taylor coefficient is a member of the truncated "
        "family, so the full algebra's rank cannot exceed the stabilized truncated rank"
    )
    if not full:
        rep.say("K=0 is the classical sub-algebra; rank and count claims for the full family were skipped")
    rep.say("all checks passed" if not failed else f"FAILED: {', '.join(failed)}")
    return rep, EXIT_OK if not failed else EXIT_CLAIM


# -- argument parsing -----------------------------------------------------------------

def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _sampling(p: argparse.ArgumentParser) -> None:
    p.add_argument("--points", type=_positive, default=DEFAULT_POINTS, help="evaluation points (default 3)")
    p.add_argument("--seed", type=_nonneg, default=0)
    p.add_argument("--bound", type=_positive, default=DEFAULT_BOUND, help="coordinates drawn from [-B, B]")


def _file_command(sub, name: str, help_text: str, order_default: int | None = 1):
    p = sub.add_parser(name, help=help_text)
    p.add_argument("file", help="algebra file, or builtin:NAME")
    p.add_argument("--order", type=_nonneg, default=order_default)
    p.add_argument("--truncation", type=_nonneg, default=None, help="replace the upper end of family ranges")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="diffinv", description="Differential invariants of operator algebras")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = _file_command(sub, "rank", "generic rank of the prolonged operators")
    _sampling(p)
    p.set_defaults(func=cmd_rank)

    p = _file_command(sub, "genset", "greedy generating set")
    p.add_argument("--verify-against", metavar="FILE", help="compare the rank of all operators with FILE's")
    _sampling(p)
    p.set_defaults(func=cmd_genset)

    p = _file_command(sub, "check", "classify an expression as invariant", order_default=None)
    p.add_argument("--expr", required=True)
    p.add_argument("--mode", choices=(ABSOLUTE, RELATIVE))
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("scan", help="rank against truncation order")
    p.add_argument("file")
    p.add_argument("--order", type=_nonneg, default=1)
    p.add_argument("--Kmax", type=_nonneg, default=5)
    _sampling(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("eikonal-demo", help="reproduce the Poincare-type example end to end")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--K", type=int, default=DEFAULT_K)
    p.add_argument("--order", type=int, default=2)
    _sampling(p)
    p.set_defaults(func=cmd_eikonal_demo)

    p = sub.add_parser("fixture", help="print a built-in algebra file")
    p.add_argument("name", choices=("eikonal", "classical"))
    p.add_argument("--n", type=_positive, default=2)
    p.add_argument("--K", type=_nonneg, default=DEFAULT_K)
    p.set_defaults(func=cmd_fixture)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        rep, code = args.func(args)
    except UsageError as exc:
        print(f"diffinv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, DegenerateSampleError) as exc:
        print(f"diffinv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if rep is not None:
        sys.stdout.write(rep.render())
    return code


if __name__ == "__main__":
    sys.exit(main())
