import io

import pytest

from cmetric.cli import CliConfig, main
from cmetric.errors import DomainError

UNIT2 = "fms 2\n0 1\n1 0\n"
THREE = "fms 3\n0 1 2\n1 0 1\n2 1 0\n"
SINGLE = "fms 1\n0\n"
BAD_TRIANGLE = "fms 3\n0 1 5\n1 0 1\n5 1 0\n"


@pytest.fixture
def fms(tmp_path):
    def make(text, name="space.fms"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return make


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def test_validate_reports_size_and_diameter(fms):
    assert run("validate", fms(THREE)) == (0, "OK n=3 diameter=2\n", "")


def test_validate_triangle_violation_names_indices(fms):
    code, out, err = run("validate", fms(BAD_TRIANGLE))
    assert code == 1 and out == ""
    assert "0" in err and "1" in err and "2" in err


def test_missing_and_malformed_files_exit_2(fms, tmp_path):
    assert run("validate", str(tmp_path / "absent.fms"))[0] == 2
    assert run("validate", fms("fms 2\n0 1\n"))[0] == 2
    assert run("validate", fms("fms 2\n0 x\nx 0\n"))[0] == 2


def test_dist(fms):
    path = fms(UNIT2)
    assert run("dist", path, "0", "1")[:2] == (0, "1\n")
    assert run("dist", path, "0", "0")[:2] == (0, "0\n")
    assert run("dist", fms(THREE, "three.fms"), "0", "5")[0] == 1


def test_dist_decimal_output(fms):
    path = fms("fms 2\n0 1/3\n1/3 0\n")
    assert run("dist", path, "0", "1")[1] == "1/3\n"
    assert run("dist", path, "0", "1", "--digits", "4")[1] == "0.3333\n"


def test_embed_singleton(fms):
    assert run("urysohn-embed", fms(SINGLE))[:2] == (0, "()\nVERIFIED 0 pairs\n")


def test_embed_unit_pair_and_determinism(fms):
    path = fms(UNIT2)
    code, out, _ = run("urysohn-embed", path)
    assert code == 0
    assert out == "()\n(():1)\nVERIFIED 1 pairs\n"
    assert run("urysohn-embed", path)[1] == out


def test_embed_three_points(fms):
    code, out, _ = run("urysohn-embed", fms(THREE))
    assert code == 0
    assert out.splitlines() == ["()", "(():1)", "(():2, (():1):1)", "VERIFIED 3 pairs"]


def test_embed_flat_output(fms):
    code, out, _ = run("urysohn-embed", fms(UNIT2), "--flat")
    assert code == 0
    lines = out.splitlines()
    assert lines[-1] == "VERIFIED 1 pairs"
    assert lines[0] != "()" or lines[1] != "(():1)"


def test_extend_empty_base(fms):
    assert run("urysohn-extend", fms(THREE))[:2] == (0, "()\n")


def test_extend_single_distance(fms):
    code, out, _ = run("urysohn-extend", fms(THREE), "--base", "0", "--dists", "2")
    assert code == 0
    assert out.splitlines()[-1] == "d(E, f(s_0)) = 2"


def test_extend_two_points(fms):
    code, out, _ = run("urysohn-extend", fms(THREE), "--base", "0,2", "--dists", "1,1")
    assert code == 0
    assert out.splitlines()[1:] == ["d(E, f(s_0)) = 1", "d(E, f(s_2)) = 1"]


def test_extend_rejects_bad_requests(fms):
    path = fms(THREE)
    code, _, err = run("urysohn-extend", path, "--base", "0,2", "--dists", "1,5")
    assert code == 1 and err
    assert run("urysohn-extend", path, "--base", "0", "--dists", "1,2")[0] == 1
    assert run("urysohn-extend", path, "--base", "7", "--dists", "1")[0] == 1


def test_hilbert(fms):
    code, out, _ = run("hilbert", fms(UNIT2), "0", "3")
    assert code == 0
    assert [c.split(" ± ")[0] for c in out.strip().split(", ")] == ["0.0000", "1.0000", "0.0000"]


def test_hilbert_singleton_and_zero_coords(fms):
    code, out, _ = run("hilbert", fms(SINGLE), "0", "4")
    assert code == 0
    assert all(float(c.split(" ± ")[0]) == 0 for c in out.strip().split(", "))
    assert run("hilbert", fms(UNIT2, "u.fms"), "1", "0")[:2] == (0, "")
    assert run("hilbert", fms(UNIT2, "u.fms"), "5", "2")[0] == 1


def test_baire_encode(fms):
    code, out, _ = run("baire", fms(UNIT2), "encode", "1")
    assert code == 0
    seq, bound = out.splitlines()
    assert seq == "1,*"
    q = bound.split()[2]
    num, _, den = q.partition("/")
    assert int(num) / int(den or 1) <= 2 ** -10


def test_baire_decode_constant(fms):
    code, out, _ = run("baire", fms(UNIT2), "decode", "0,*")
    assert code == 0
    assert out.splitlines()[-1].startswith("nearest 0 ")


def test_baire_decode_violation_exits_1_with_index(fms):
    code, _, err = run("baire", fms(UNIT2), "decode", "0,0,0,0,1,*")
    assert code == 1
    assert "index 3" in err


def test_baire_bad_literal(fms):
    assert run("baire", fms(UNIT2), "decode", "0,x,*")[0] == 2
    assert run("baire", fms(UNIT2), "encode", "zero")[0] == 2


def test_verify_deterministic_and_passing():
    code, out, _ = run("verify", "all", "10", "0")
    assert code == 0
    assert out.splitlines()[-1] == "ALL PASS"
    assert run("verify", "all", "10", "0")[1] == out
    assert run("verify", "urysohn", "--trials", "10", "--seed", "0")[1] == \
        run("verify", "urysohn", "10", "0")[1]


def test_precision_from_environment(fms, monkeypatch):
    path = fms(UNIT2)
    monkeypatch.setenv("CMETRIC_PREC", "4")
    low = run("hilbert", path, "0", "2")[1]
    monkeypatch.setenv("CMETRIC_PREC", "nope")
    assert run("hilbert", path, "0", "2")[0] == 2
    monkeypatch.delenv("CMETRIC_PREC")
    assert run("hilbert", path, "0", "2", "--prec", "4")[1] == low


def test_config_invariants():
    with pytest.raises(DomainError):
        CliConfig(precision=0)
    with pytest.raises(DomainError):
        CliConfig(digits=0)
    assert run("dist", "x", "0", "0", "--prec", "0")[0] == 1


def test_usage_error_exits_2():
    assert run("no-such-command")[0] == 2


def test_verify_urysohn_hundred_trials():
    code, out, _ = run("verify", "urysohn", "100", "42")
    assert code == 0 and out.endswith("ALL PASS\n")
    assert run("verify", "urysohn", "100", "42")[1] == out
