import csv
import math
import io
import json
from fractions import Fraction

import jsonschema
import pytest

from partialtheta.cli import (
    load_schema, main, parse_complex, parse_complex_list, parse_grid_component, parse_matrix,
    parse_range, parse_rational_list,
)
from partialtheta.errors import PreconditionError


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    doc = json.loads(out)
    jsonschema.validate(doc, load_schema(argv[0]))
    return doc


def test_parsers():
    assert parse_complex("-0.3+0.1i") == complex(-0.3, 0.1)
    assert parse_complex("2j") == 2j
    assert parse_complex("1.5") == 1.5
    assert list(parse_complex_list("-0.3,0.2-1i")) == [-0.3, 0.2 - 1j]
    assert parse_rational_list("1/3,-2") == [Fraction(1, 3), Fraction(-2)]
    assert parse_matrix("2,-1;-1,2").tolist() == [[2, -1], [-1, 2]]
    assert parse_range("0:1:3") == [0.0, 0.5, 1.0]
    assert parse_grid_component("-0.5@0:1:2") == [-0.5 + 0j, -0.5 + 1j]
    with pytest.raises(PreconditionError):
        parse_complex("abc")


def test_root_info(capsys):
    doc = run_json(capsys, "root-info", "A", "2")
    assert doc["n_pos"] == 3 and doc["weyl_order"] == 6
    assert run_json(capsys, "root-info", "D4")["n_pos"] == 12


def test_kostant(capsys):
    assert run_json(capsys, "kostant", "A2", "--beta", "2,1")["value"] == 2


def test_theta_eval(capsys):
    doc = run_json(capsys, "theta-eval", "partial", "--A", "1", "--u", "0", "--eps", "-1",
                   "--tau", "1i")
    assert doc["result"]["value_re"] > 0
    doc = run_json(capsys, "theta-eval", "kostant", "--type", "A2", "--p", "2", "--u", "0,0",
                   "--eps", "-0.5,-0.5", "--tau", "1i")
    assert doc["result"]["error"] < 1e-10


@pytest.mark.parametrize("argv", [
    ["s-check", "negative", "--A", "1", "--u", "0.1+0.05i", "--eps", "-0.3", "--tau", "0.6i"],
    ["s-check", "kostant", "--type", "A1", "--p", "2", "--u", "0.07", "--eps", "-0.4", "--tau", "0.7i"],
    ["s-check", "full", "--A", "1", "--u", "0.1", "--eps", "0.3", "--tau", "0.7i"],
    ["s-check", "unregularized", "--A", "2", "--u", "0.1", "--eps", "-0.3", "--tau", "0.8i"],
    ["s-check", "contour", "--eps", "0.3", "--mu-shift", "0.5+0.8i", "--z", "1", "--tau", "1i"],
])
def test_s_check(capsys, argv):
    doc = run_json(capsys, *argv)
    assert doc["result"]["residual"] < 1e-6


def test_char_example(capsys):
    doc = run_json(capsys, "char", "atypical", "--type", "A1", "--p", "2", "--mu", "0", "--order", "8")
    terms = doc["series"]["terms"]
    assert [t["exponent"] for t in terms] == ["1/8", "9/8", "25/8", "49/8"]
    assert [t["coeff_re"] for t in terms] == [1, -1, 1, -1]
    for kind, extra in [("constant-term", ["--mu", "1,0"]), ("full", ["--mu", "1,0"]),
                        ("typical", ["--lam", "1/3,1/5", "--eps", "-0.2,-0.1"])]:
        run_json(capsys, "char", kind, "--type", "A2", "--p", "2", "--order", "4", *extra)


def test_qdim_examples(capsys):
    doc = run_json(capsys, "qdim", "--p", "2", "--type", "A1", "--mu", "0", "--eps", "-0.3")
    assert doc["value_re"] == pytest.approx(1) and doc["value_im"] == 0
    doc = run_json(capsys, "qdim", "--p", "2", "--type", "A1", "--mu", "-1", "--eps", "-0.3",
                   "--numeric")
    assert doc["value_re"] == pytest.approx(2 * math.cosh(0.15 * math.pi))
    assert abs(doc["diagnostics"]["numeric"]["value_re"] - doc["value_re"]) < 1e-3
    doc = run_json(capsys, "qdim", "--p", "2", "--type", "A1", "--mu", "0", "--eps", "3-0.1i")
    assert doc["conditions"]["conditions_met"] is False
    doc = run_json(capsys, "qdim", "--p", "2", "--type", "A1", "--mu", "-1")
    assert doc["value_re"] == 2 and doc["region"] == "eps0"


def test_sweep_csv_and_order(capsys):
    argv = ["qdim-sweep", "--type", "A1", "--p", "2", "--mu", "1", "--grid", "-0.6:-0.1:6@0:0.5:3"]
    doc = run_json(capsys, *argv)
    serial = doc["rows"]
    assert len(serial) == 18
    par = run_json(capsys, *argv, "--workers", "3")["rows"]
    assert par == serial
    code, out, _ = run(capsys, *argv, "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["eps_re_1", "eps_im_1", "region", "conditions", "qdim_re", "qdim_im",
                             "k_star"]
    assert len(rows) == 18 and rows[0]["region"] == "neg"


def test_sweep_boundary_rows(capsys):
    doc = run_json(capsys, "qdim-sweep", "--type", "A1", "--p", "2", "--mu", "0",
                   "--grid", "-0.5:0.5:3")
    assert [r["region"] for r in doc["rows"]] == ["neg", "eps0", "pos"]
    doc = run_json(capsys, "qdim-sweep", "--type", "A2", "--p", "2", "--mu", "0,0",
                   "--grid", "-0.5", "--grid", "0:0.5:2")
    assert [r["region"] for r in doc["rows"]] == ["invalid", "invalid"]
    assert all(r["qdim_re"] is None for r in doc["rows"])


def test_verify_subset(capsys):
    code, out, err = run(capsys, "verify", "--criteria", "4,9")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, load_schema("verify"))
    assert doc["passed"] and "seconds" not in doc["criteria"][0]
    assert "[PASS] criterion 4" in err


def test_exit_codes(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2
    capsys.readouterr()
    code, _, err = run(capsys, "theta-eval", "kostant", "--type", "A2", "--u", "0,0",
                       "--eps", "-0.5,-0.5", "--tau", "1i")
    assert code == 3
    doc = json.loads(err)
    jsonschema.validate(doc, load_schema("error"))
    code, _, _ = run(capsys, "theta-eval", "partial", "--A", "1", "--u", "0", "--eps", "-1",
                     "--tau", "-1i")
    assert code == 3
    code, _, _ = run(capsys, "qdim", "--p", "2", "--type", "A1", "--mu", "0", "--eps", "0.5i")
    assert code == 3
    code, _, _ = run(capsys, "root-info", "B", "2")
    assert code == 3


def test_numeric_exit_code(capsys):
    # tiny Im(tau) in rank 3 needs a summation box beyond the resource cap
    code, _, err = run(capsys, "theta-eval", "partial", "--A", "1,0,0;0,1,0;0,0,1", "--u", "0,0,0",
                       "--eps", "-0.001,-0.001,-0.001", "--tau", "0.0001i")
    assert code == 4 and json.loads(err)["error"] == "NonConvergent"
    code, _, err = run(capsys, "s-check", "negative", "--A", "1", "--u", "0", "--eps", "-0.001",
                       "--tau", "1i")
    assert code == 3 and json.loads(err)["error"] == "PoleTooClose"


def test_determinism(capsys):
    argv = ["qdim", "--p", "3", "--type", "A2", "--mu", "1,-2", "--eps", "-0.3,-0.2+0.1i", "--numeric"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b


def test_config_merge(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\ntol = 1e-6\nformat = pretty\n")
    code, out, _ = run(capsys, "theta-eval", "partial", "--A", "1", "--u", "0", "--eps", "-1",
                       "--tau", "1i", "--config", str(cfg))
    assert code == 0 and not out.lstrip().startswith("{")
    code, out, _ = run(capsys, "theta-eval", "partial", "--A", "1", "--u", "0", "--eps", "-1",
                       "--tau", "1i", "--config", str(cfg), "--format", "json")
    assert json.loads(out)["result"]["error"] < 1e-6
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense_key = 3\n")
    code, _, _ = run(capsys, "root-info", "A2", "--config", str(bad))
    assert code == 3
