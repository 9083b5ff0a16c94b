import csv
import io
import json

import mpmath
import pytest

from dimerfsc.cli import main
from dimerfsc.diagrams import TwoColumnDiagram
from dimerfsc.spectrum import LatticeParams, energy


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_spectrum_sector(capsys):
    code, out, _ = run(capsys, "spectrum", "--n", "2", "--alpha", "1", "--v", "0")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == 1
    assert doc["config"]["n"] == 2 and doc["config"]["alpha"] == "1"
    assert [r["diagram"] for r in doc["rows"]] == ["(-|-)", "(1|1)"]
    assert float(doc["rows"][0]["lambda"]) == pytest.approx(2.6180339887)


def test_spectrum_alpha_zero_csv(capsys):
    code, out, _ = run(capsys, "spectrum", "--n", "2", "--alpha", "0", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 4
    assert all(float(r["energy"]) == 0 for r in rows)
    assert list(rows[0]) == ["N", "alpha", "v", "diagram", "lambda", "energy"]


def test_spectrum_errors(capsys):
    code, _, err = run(capsys, "spectrum", "--n", "2", "--alpha", "one")
    assert code == 2 and "alpha" in err
    code, _, err = run(capsys, "spectrum", "--n", "2", "--v", "1/2")
    assert code == 2 and "incompatible" in err


def test_deterministic_output(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["spectrum", "--n", "5", "--alpha", "0.5", "--digits", "30", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert "e" in json.loads(a.read_text())["rows"][0]["lambda"]


def test_fsc_command(capsys):
    code, out, _ = run(capsys, "fsc", "--n", "40", "--l-max", "2", "--diagram", "(1|-)", "--diagram", "(-|-)")
    assert code == 0
    rows = json.loads(out)["rows"]
    assert rows[0]["iom"][0] == "11/6"
    assert abs(float(rows[0]["residual"])) < 1e-8
    code, _, _ = run(capsys, "fsc", "--n", "40", "--l-max", "9")
    assert code == 2


def test_fit_command(capsys):
    code, out, _ = run(capsys, "fit", "--n", "50", "100", "150", "200", "300", "400", "--l-max", "0")
    assert code == 0
    rep = json.loads(out)["report"]
    assert rep["expected_slope"] == -3
    assert abs(float(rep["slope"]) + 3) < 0.1
    assert len(rep["residuals"]) == 6


def test_fit_exit_codes(capsys):
    code, _, _ = run(capsys, "fit", "--n", "50", "60", "--l-max", "0")
    assert code == 2
    code, _, err = run(capsys, "fit", "--n", "50", "76", "116", "174", "264", "400", "--l-max", "2", "--digits", "15")
    assert code == 3 and "--digits" in err


def test_verify_command(capsys):
    code, out, _ = run(capsys, "verify", "--n-max", "5", "--m", "2", "4")
    assert code == 0
    rep = json.loads(out)["report"]
    assert rep["all_pass"]
    assert {i["check"] for i in rep["items"]} >= {"trace_equals_matchings", "anticommutes_V_T", "sector_dimensions"}
    code, _, _ = run(capsys, "verify", "--n-max", "20")
    assert code == 2


def test_verify_traces(capsys):
    code, out, _ = run(capsys, "verify", "--n-max", "6", "--traces", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert any(r["check"] == "trace_sum_rule_k3" for r in rows)
    assert all(r["passed"] == "True" for r in rows)


def test_characters_command(capsys):
    code, out, _ = run(capsys, "characters", "--l", "4")
    assert code == 0 and json.loads(out)["report"]["all_hold"]
    code, out, _ = run(capsys, "characters", "--limit", "--v", "0", "--order", "10", "--l", "12")
    assert json.loads(out)["report"]["first_mismatch"] == "all match"
    code, out, _ = run(capsys, "characters", "--limit", "--v", "0", "--order", "10", "--l", "3")
    rep = json.loads(out)["report"]
    assert not rep["all_match"] and rep["first_mismatch"] == "4"
    code, _, _ = run(capsys, "characters", "--l", "9")
    assert code == 2


def test_fsc_output_keeps_requested_digits(capsys):
    code, out, _ = run(capsys, "fsc", "--n", "100", "--l-max", "1", "--format", "csv")
    assert code == 0
    row = next(csv.DictReader(io.StringIO(out)))
    with mpmath.workdps(60):
        exact = energy(LatticeParams(100, 1, 60), TwoColumnDiagram(50))
        assert abs(mpmath.mpf(row["energy"]) - exact) < mpmath.mpf(10) ** -55
