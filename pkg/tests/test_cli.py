import pytest

from diffinv.algfile import eikonal_text
from diffinv.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def machine(out):
    return [line for line in out.splitlines() if line.startswith("#? ")]


def kv(out):
    d = {}
    for line in machine(out):
        for tok in line[3:].split():
            k, _, v = tok.partition("=")
            d.setdefault(k, v)
    return d


def test_rank_first_order(capsys):
    code, out, _ = run(capsys, "rank", "builtin:eikonal_n3", "--order", "1")
    assert code == 0
    assert "rank=9 jet_dim=9 invariants=0" in out
    assert "seed=0" in out and "points=3" in out and "bound=1000000" in out


def test_rank_second_order(capsys):
    code, out, _ = run(capsys, "rank", "builtin:eikonal_n3", "--order", "2")
    assert code == 0 and "invariants=3" in out


def test_rank_seed_changes_echo_not_rank(capsys):
    _, a, _ = run(capsys, "rank", "builtin:eikonal_n2", "--order", "2", "--seed", "1")
    _, b, _ = run(capsys, "rank", "builtin:eikonal_n2", "--order", "2", "--seed", "2")
    assert kv(a)["rank"] == kv(b)["rank"] == "11"
    assert "seed=1" in a and "seed=2" in b


def test_rank_on_a_user_file(tmp_path, capsys):
    f = tmp_path / "e.alg"
    f.write_text(eikonal_text(1, 2))
    code, out, _ = run(capsys, "rank", str(f), "--truncation", "1")
    assert code == 0 and "rank=5" in out and "truncation=1" in out
    # K = 0 leaves only the classical translations, rotation and scaling
    _, out, _ = run(capsys, "rank", str(f), "--truncation", "0")
    assert "truncation=0" in out and "rank=4" in out


def test_genset(capsys):
    code, out, _ = run(capsys, "genset", "builtin:eikonal_n1")
    d = kv(out)
    assert code == 0 and d["size"] == "5" and len(d["labels"].split(",")) == 5


def test_genset_singleton(tmp_path, capsys):
    f = tmp_path / "one.alg"
    f.write_text("space: x0 x1 ; u\nmetric: + -\noperator T { x1: 1 }\n")
    code, out, _ = run(capsys, "genset", str(f))
    assert code == 0 and kv(out)["labels"] == "T"


def test_genset_verify_against(capsys):
    code, out, _ = run(capsys, "genset", "builtin:classical_n2", "--verify-against", "builtin:eikonal_n2")
    assert code == 0 and "equal_rank=true" in out


def test_genset_verify_against_fails(tmp_path, capsys):
    f = tmp_path / "t.alg"
    f.write_text("space: x0 x1 x2 ; u\nmetric: + - -\noperator T { x0: 1 }\n")
    code, out, _ = run(capsys, "genset", str(f), "--verify-against", "builtin:eikonal_n2")
    assert code == 1 and "equal_rank=false" in out


def test_check_norm_is_relative(capsys):
    code, out, _ = run(capsys, "check", "builtin:eikonal_n3", "--expr", "u_0^2-u_1^2-u_2^2-u_3^2", "--order", "1")
    assert code == 0 and "verdict=relative" in out
    assert "operator=P^1_u multiplier=2" in out


def test_check_constant_is_absolute(capsys):
    code, out, _ = run(capsys, "check", "builtin:eikonal_n3", "--expr", "1", "--mode", "absolute")
    assert code == 0 and "verdict=absolute" in out


def test_check_not_invariant(capsys):
    code, out, _ = run(capsys, "check", "builtin:eikonal_n3", "--expr", "u_0")
    assert code == 0
    assert "verdict=not_invariant witness=" in out
    code, _, _ = run(capsys, "check", "builtin:eikonal_n3", "--expr", "u_0", "--mode", "relative")
    assert code == 1


def test_check_mode_absolute_rejects_relative(capsys):
    code, _, _ = run(capsys, "check", "builtin:eikonal_n2", "--expr", "u_0^2-u_1^2-u_2^2", "--mode", "absolute")
    assert code == 1


def test_scan(capsys):
    code, out, _ = run(capsys, "scan", "builtin:eikonal_n3", "--order", "1", "--Kmax", "5")
    d = kv(out)
    assert code == 0 and d["final_rank"] == "9" and int(d["stable_from"]) <= 5
    assert sum(1 for line in machine(out) if " K=" in line) == 6


def test_scan_kmax_zero_single_row(capsys):
    _, out, _ = run(capsys, "scan", "builtin:eikonal_n2", "--Kmax", "0")
    assert sum(1 for line in machine(out) if " K=" in line) == 1


def test_scan_second_order_stable_at_jet_dim_minus_two(capsys):
    _, out, _ = run(capsys, "scan", "builtin:eikonal_n2", "--order", "2", "--Kmax", "4")
    assert kv(out)["final_rank"] == "11"
    assert "jet_dim=13" in out


def test_demo_n2(capsys):
    code, out, _ = run(capsys, "eikonal-demo", "--n", "2", "--K", "3")
    assert code == 0
    assert "invariants_order2=2" in out and "result=pass" in out
    assert "status=fail" not in out


def test_demo_n1_k0(capsys):
    code, out, _ = run(capsys, "eikonal-demo", "--n", "1", "--K", "0")
    assert code == 0 and "result=pass" in out
    assert "check=rank_order1 status=skip" in out


def test_demo_order1_only(capsys):
    code, out, _ = run(capsys, "eikonal-demo", "--n", "3", "--order", "1")
    assert code == 0 and "invariants_order2" not in out


@pytest.mark.parametrize(
    "argv",
    [
        ("rank", "builtin:eikonal_n2", "--order", "2", "--seed", "5"),
        ("genset", "builtin:eikonal_n1"),
        ("check", "builtin:eikonal_n2", "--expr", "u_0^2-u_1^2-u_2^2"),
        ("scan", "builtin:eikonal_n2", "--Kmax", "2"),
        ("eikonal-demo", "--n", "2", "--K", "1"),
    ],
)
def test_reruns_are_byte_identical(capsys, argv):
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b and machine(a)


def test_fixture_prints_shipped_text(capsys):
    code, out, _ = run(capsys, "fixture", "eikonal", "--n", "2")
    assert code == 0 and out == eikonal_text(2, 3)


@pytest.mark.parametrize(
    "argv, needle",
    [
        (("rank", "/nonexistent/file.alg"), "cannot read"),
        (("rank", "builtin:nope"), "cannot read"),
        (("check", "builtin:eikonal_n2", "--expr", "u_0 +"), "--expr"),
        (("check", "builtin:eikonal_n2", "--expr", "v"), "unknown variable"),
        (("check", "builtin:eikonal_n2", "--expr", "0"), "zero"),
        (("check", "builtin:eikonal_n2", "--expr", "u_00", "--order", "1"), "order"),
        (("eikonal-demo", "--n", "0"), "--n"),
        (("eikonal-demo", "--order", "3"), "--order"),
    ],
)
def test_usage_errors_exit_2(capsys, argv, needle):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == ""
    assert needle in err and "Traceback" not in err


def test_malformed_file_exits_2_with_position(tmp_path, capsys):
    f = tmp_path / "bad.alg"
    f.write_text("space: x0 x1 ; u\nmetric: + - -\noperator T { x0: 1 }\n")
    code, out, err = run(capsys, "rank", str(f))
    assert code == 2 and "line 2, column 1" in err and "metric has" in err
    f.write_text("space: x0 ; u\n")
    code, _, err = run(capsys, "rank", str(f))
    assert code == 2 and "no operators" in err


@pytest.mark.parametrize("argv", [(), ("rank",), ("rank", "x", "--order", "-1"), ("bogus",), ("scan", "x", "--points", "0")])
def test_argparse_errors_exit_2(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2
