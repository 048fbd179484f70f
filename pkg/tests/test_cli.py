import json
import subprocess
import sys

import pytest
import sympy

from fractal_zeta.cli import main, parse_complex, UsageError


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_graph_diamond_csv(capsys):
    code, out, _ = run(capsys, "graph", "--model", "diamond", "--level", "1", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "u,v,weight" and len(lines) == 5


def test_graph_cycle(capsys):
    code, out, _ = run(capsys, "graph", "--model", "double-pq", "--p", "1/2", "--level", "2")
    doc = json.loads(out)
    assert code == 0 and doc["schema"] == 1
    assert len(doc["vertices"]) == 18 and len(doc["edges"]) == 18


def test_graph_sg_level0(capsys):
    _, out, _ = run(capsys, "graph", "--model", "sg", "--level", "0")
    doc = json.loads(out)
    assert len(doc["vertices"]) == 3 and len(doc["edges"]) == 3


def test_graph_matrix(capsys):
    _, out, _ = run(capsys, "graph", "--model", "sg", "--level", "1", "--format", "matrix",
                    "--kind", "probabilistic")
    assert out.strip()


def test_regdet_double_sg(capsys):
    code, out, _ = run(capsys, "regdet", "--model", "double-sg")
    doc = json.loads(out)
    assert code == 0
    expr = sympy.sympify(doc["closed_form"].replace("^", "**"))
    assert sympy.simplify(expr - sympy.Rational(1, 2) * sympy.sqrt(sympy.Rational(5, 3))) == 0
    assert doc["decimal"].startswith("0.6454972243")
    assert len(doc["decimal"].replace("0.", "", 1)) == 30


def test_regdet_sg_is_usage_error(capsys):
    code, _, err = run(capsys, "regdet", "--model", "sg")
    assert code == 2 and "error" in err


def test_det_diamond(capsys):
    _, out, _ = run(capsys, "det", "--model", "diamond", "--level", "3", "--kind", "probabilistic")
    row = json.loads(out)["rows"][-1]
    assert row["n"] == 3 and row["det"] == "2^-11" and row["det_exact"] == "1/2048"


def test_det_table_csv(capsys):
    _, out, _ = run(capsys, "det", "--model", "double-sg", "--level", "3", "--from", "1", "--format", "csv")
    lines = out.strip().splitlines()
    assert lines[0] == "n,vertices,det,det_decimal,trees,log_trees_per_vertex"
    assert lines[1].startswith("1,9,2^4 * 3^5 * 5^2,") and ",10800," in lines[1]
    assert len(lines) == 4


def test_det_expansion_block(capsys):
    _, out, _ = run(capsys, "det", "--model", "double-pq", "--p", "1/2", "--level", "2")
    exp = json.loads(out)["expansion"]
    assert exp["per_vertex"] == "0"
    assert float(exp["constant_decimal"]) == pytest.approx(float(sympy.log(4)), abs=1e-15)
    assert float(exp["minus_log_regularized_det"]) == pytest.approx(float(sympy.log(4)), abs=1e-15)


def test_trees(capsys):
    _, out, _ = run(capsys, "trees", "--model", "double-sg", "--level", "2")
    doc = json.loads(out)
    assert doc["factored"] == "2^10 * 3^11 * 5^6"
    assert int(doc["trees"]) == 2 ** 10 * 3 ** 11 * 5 ** 6


def test_trees_weighted_fails(capsys):
    code, _, _ = run(capsys, "trees", "--model", "double-pq", "--p", "0.3", "--level", "2")
    assert code == 2


def test_zeta(capsys):
    _, out, _ = run(capsys, "zeta", "--model", "double-pq", "--p", "1/2", "--s", "2")
    doc = json.loads(out)
    assert doc["converged"] is True
    assert float(doc["value"]["re"]) == pytest.approx(1 / 45, abs=1e-12)
    assert float(doc["value"]["im"]) == 0


def test_zeta_complex_and_bad_s(capsys):
    code, out, _ = run(capsys, "zeta", "--model", "diamond", "--s", "2+1i")
    assert code == 0 and float(json.loads(out)["value"]["im"]) != 0
    code, _, _ = run(capsys, "zeta", "--model", "diamond", "--s", "abc")
    assert code == 2
    code, _, _ = run(capsys, "zeta", "--model", "diamond", "--s", "0.3")
    assert code == 2


def test_parse_complex():
    assert parse_complex("2+1i") == 2 + 1j
    assert parse_complex(" 1.5 ") == 1.5
    with pytest.raises(UsageError):
        parse_complex("1+")


def test_poles(capsys):
    _, out, _ = run(capsys, "poles", "--model", "diamond")
    doc = json.loads(out)
    assert [l["real_part"] for l in doc["lines"]] == ["1"]


def test_spectrum_and_catalog(capsys):
    _, out, _ = run(capsys, "spectrum", "--model", "diamond", "--level", "2")
    assert json.loads(out)["schema"] == 1
    _, out, _ = run(capsys, "catalog")
    assert {"diamond", "sg", "double-sg", "pq", "double-pq"} <= {m["name"] for m in json.loads(out)["models"]}


def test_usage_errors(capsys):
    assert run(capsys, "graph", "--model", "koch", "--level", "1")[0] == 2
    assert run(capsys, "graph", "--model", "pq", "--level", "1")[0] == 2
    assert run(capsys, "det", "--model", "diamond", "--level", "2", "--from", "3")[0] == 2
    assert run(capsys)[0] == 2


def test_verify_oracle(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "oracle")
    doc = json.loads(out)
    assert code == 0 and doc["schema"] == 1
    assert doc["checks"] and all(c["status"] == "pass" for c in doc["checks"])


def test_verify_failure_exit_code(monkeypatch, capsys):
    from fractal_zeta import cli, verify
    bad = verify.VerifyReport("mellin", [verify.Check("x", "forced", False, 1, 2, 0)])
    monkeypatch.setattr(cli, "run_suite", lambda name: bad)
    assert run(capsys, "verify", "--suite", "mellin")[0] == 1


def test_out_file_and_determinism(tmp_path, capsys):
    target = tmp_path / "t.json"
    assert run(capsys, "trees", "--model", "sg", "--level", "3", "--out", str(target))[0] == 0
    _, stdout, _ = run(capsys, "trees", "--model", "sg", "--level", "3")
    assert target.read_text() == stdout


def test_module_entry_point_byte_identical():
    cmd = [sys.executable, "-m", "fractal_zeta", "det", "--model", "double-sg", "--level", "3", "--from", "1"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and json.loads(a)["schema"] == 1
