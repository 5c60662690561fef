import csv
import json
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from sldkit import cli
from sldkit.errors import ValidationError

FIXTURES = Path(__file__).resolve().parents[1] / "docs" / "fixtures"


def write(tmp_path, data, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def thermal(method="moments", **extra):
    return {"family": {"kind": "single_mode_gaussian", "parameter": "nbar", "params": {"nbar": 1.0}},
            "theta": 1.0, "method": method, **extra}


def test_qubit_fixture(tmp_path, capsys):
    out = tmp_path / "out.json"
    code, _, _ = run(["compute", "-s", str(FIXTURES / "qubit.json"), "-o", str(out)], capsys)
    assert code == 0
    rec = json.loads(out.read_text())
    assert rec["schema_version"] == "1"
    assert abs(rec["qfi"] - 0.75) <= 1e-12
    assert abs(rec["crb"] - 4 / 3) <= 1e-12
    L = cli.decode_array(rec["sld"]["L"], 2)
    assert L.shape == (2, 2) and np.iscomplexobj(L)
    assert rec["residuals"]["sld_equation"] <= 1e-12


def test_thermal_crosscheck(tmp_path, capsys):
    code, out, _ = run(["crosscheck", "-s", str(FIXTURES / "thermal.json")], capsys)
    assert code == 0
    rec = json.loads(out)
    assert set(rec["routes"]) == {"moments", "generator", "fock_oracle"}
    assert all(abs(q - 0.5) <= 1e-5 for q in rec["routes"].values())
    assert rec["agree"] and rec["tolerance"] == 1e-5


def test_squeezed_fixture(tmp_path, capsys):
    out = tmp_path / "out.json"
    assert run(["compute", "-s", str(FIXTURES / "squeezed_phase.json"), "-o", str(out)], capsys)[0] == 0
    rec = json.loads(out.read_text())
    assert abs(rec["qfi"] - 2 * np.sinh(1) ** 2) <= 1e-6
    assert set(rec["sld"]) == {"Phi", "zeta", "nu"}


def test_vacuum_generator_exit_3(tmp_path, capsys):
    path = write(tmp_path, {"family": {"kind": "single_mode_gaussian", "parameter": "r"}, "theta": 0.0, "method": "generator"})
    code, _, err = run(["compute", "-s", path], capsys)
    assert code == 3 and "pure or near-pure mode" in err


def test_record_round_trip(tmp_path, capsys):
    out = tmp_path / "out.json"
    path = write(tmp_path, thermal(outputs=["qfi", "sld", "residuals", "crb"]))
    run(["compute", "-s", path, "-o", str(out)], capsys)
    first = json.loads(out.read_text())
    out2 = tmp_path / "again.json"
    out2.write_text(json.dumps(first, indent=2))
    assert json.loads(out2.read_text()) == first


def test_deterministic_output(tmp_path, capsys):
    path = write(tmp_path, thermal(outputs=["qfi", "sld", "residuals"]))
    a = cli.evaluate(cli.load_scenario(path))
    b = cli.evaluate(cli.load_scenario(path))
    a.pop("timing_s"), b.pop("timing_s")
    assert a == b


def test_validation_errors(tmp_path, capsys):
    cases = [
        {"family": {"kind": "bogus"}, "method": "auto"},
        thermal(method="eigenbasis"),
        {"family": {"kind": "qubit_exponential"}, "method": "moments"},
        {"family": {"kind": "two_mode_squeezed", "parameter": "r"}, "method": "fock_oracle"},
        {"family": {"kind": "explicit_exponential", "params": {"G0": [[0, 1], [0, 0]], "G1": [[1, 0], [0, 1]]}}, "method": "auto"},
        {**thermal(), "outputs": ["qfi", "nonsense"]},
    ]
    for data in cases:
        code, _, err = run(["compute", "-s", write(tmp_path, data)], capsys)
        assert code == 2, data
    code, _, err = run(["compute", "-s", write(tmp_path, cases[4])], capsys)
    assert "(0, 1)" in err or "(1, 0)" in err
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["compute", "-s", str(bad)], capsys)[0] == 2
    assert run(["compute", "-s", str(tmp_path / "missing.json")], capsys)[0] == 2


def test_complex_matrix_input(tmp_path, capsys):
    data = {"family": {"kind": "unitary_rotation", "params": {
        "G0": [[-0.3, 0.0], [0.0, -1.5]],
        "H": [[[0, 0], [0, -1]], [[0, 1], [0, 0]]]}}, "theta": 0.2, "method": "crosscheck"}
    code, out, _ = run(["crosscheck", "-s", write(tmp_path, data)], capsys)
    rec = json.loads(out)
    assert code == 0 and "unitary" in rec["routes"] and rec["agree"]


def test_squeezed_sweep(tmp_path, capsys):
    out = tmp_path / "sq.csv"
    data = {"family": {"kind": "single_mode_gaussian", "parameter": "rotation", "params": {"r": 0.0}},
            "theta": 0.0, "method": "moments", "sweep": {"from": 0.0, "to": 1.0, "steps": 11, "variable": "r"}}
    code, _, _ = run(["sweep", "-s", write(tmp_path, data), "-o", str(out)], capsys)
    assert code == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0])[:2] == ["r", "theta"]
    r = np.array([float(row["r"]) for row in rows])
    qfi = np.array([float(row["qfi"]) for row in rows])
    assert np.allclose(r, np.linspace(0, 1, 11))
    assert np.allclose(qfi, 2 * np.sinh(2 * r) ** 2, atol=1e-6)


def test_thermal_sweep_csv(tmp_path, capsys):
    out = tmp_path / "t.csv"
    data = thermal(sweep={"from": 0.5, "to": 4.0, "steps": 8, "workers": 3})
    code, _, _ = run(["sweep", "-s", write(tmp_path, data), "-o", str(out)], capsys)
    assert code == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["theta", "qfi", "residual_max", "method", "schema_version"]
    theta = np.array([float(r["theta"]) for r in rows])
    assert np.all(np.diff(theta) > 0)
    qfi = np.array([float(r["qfi"]) for r in rows])
    assert np.allclose(qfi, 1 / (theta * (theta + 1)), atol=1e-6)
    assert {r["schema_version"] for r in rows} == {"1"}


def test_sweep_steps_validation(tmp_path, capsys):
    data = thermal(sweep={"from": 0.5, "to": 4.0, "steps": 1})
    assert run(["sweep", "-s", write(tmp_path, data), "-o", str(tmp_path / "x.csv")], capsys)[0] == 2


def test_sweep_failure_reports_theta(tmp_path, capsys):
    data = {"family": {"kind": "single_mode_gaussian", "parameter": "r"}, "method": "generator",
            "sweep": {"from": 0.0, "to": 0.2, "steps": 3}}
    code, _, err = run(["sweep", "-s", write(tmp_path, data), "-o", str(tmp_path / "x.csv")], capsys)
    assert code == 3 and "theta = 0.0" in err


def test_global_overrides(tmp_path, capsys):
    path = write(tmp_path, thermal(method="fock_oracle"))
    code, out, _ = run(["--fock-dim", "60", "compute", "-s", path], capsys)
    assert code == 0 and abs(json.loads(out)["qfi"] - 0.5) <= 1e-5
    code, out, _ = run(["compute", "-s", path, "--fd-step", "1e-4", "--fock-dim", "60"], capsys)
    assert code == 0 and abs(json.loads(out)["qfi"] - 0.5) <= 1e-5
    assert run(["compute", "-s", path, "--fd-step", "-1"], capsys)[0] == 2


def test_coeffs(capsys):
    code, out, _ = run(["coeffs", "--n", "6"], capsys)
    rows = [line.split("\t") for line in out.strip().splitlines()]
    assert code == 0
    assert [Fraction(r[1]) for r in rows] == [1, 0, Fraction(-1, 12), 0, Fraction(1, 120), 0, Fraction(-34, 40320)]
    for _, frac, dec in rows:
        f = Fraction(frac)
        assert abs(float(dec) - float(f)) <= 1e-15 * max(1, abs(float(f)))
    code, out, _ = run(["coeffs", "--n", "0"], capsys)
    assert out.strip().splitlines() == ["0\t1\t1.0"]
    assert run(["coeffs", "--n", "61"], capsys)[0] == 2


def test_crosscheck_never_passes_on_disagreement(monkeypatch, tmp_path):
    sc = cli.parse_scenario(thermal(method="crosscheck"))
    original = cli.route

    def skewed(sc_, method, theta):
        out = original(sc_, method, theta)
        if method == "generator":
            out["qfi"] += 2e-5
        return out

    monkeypatch.setattr(cli, "route", skewed)
    rec = cli.evaluate(sc)
    assert rec["agree"] is False
    code = cli.main(["crosscheck", "-s", write(tmp_path, thermal())])
    assert code == 1


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "sldkit", "coeffs", "--n", "2"], capture_output=True, text=True)
    assert proc.returncode == 0 and "-1/12" in proc.stdout


def test_decode_array():
    assert np.array_equal(cli.decode_array([[1, 2], [3, 4]], 2), [[1, 2], [3, 4]])
    z = cli.decode_array([[[1, 2], [3, 4]], [[5, 6], [7, 8]]], 2)
    assert z[0, 1] == 3 + 4j
    with pytest.raises(ValidationError):
        cli.decode_array([1, 2, 3], 2)
    assert np.array_equal(cli.decode_array(cli.encode_array(z), 2), z)
