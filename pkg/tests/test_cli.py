import csv
import json
import math
import subprocess
import sys

import pytest

from skyrme_s3.cli import run


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_solve_writes_profile_and_sidecar(tmp_path, capsys):
    out = tmp_path / "profile.csv"
    assert run(["solve", "--radius", "3", "--charge", "1", "--output", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0] == ["psi", "F"]
    assert float(rows[-1][1]) == pytest.approx(math.pi, abs=1e-14)
    meta = json.loads((tmp_path / "profile.csv.json").read_text())
    res = meta["result"]
    assert set(res) == {"L", "Q", "slope0", "residual_norm", "energy"}
    assert res["energy"] < 20 * math.pi**2
    # every default is recorded
    assert meta["parameters"]["grid"] == 513 and meta["parameters"]["tol"] == 1e-6
    assert "slope0=" in capsys.readouterr().out


def test_solve_json_matches_csv(tmp_path):
    c, j = tmp_path / "p.csv", tmp_path / "p.json"
    assert run(["solve", "--radius", "2", "--grid", "65", "--output", str(c)]) == 0
    assert run(["solve", "--radius", "2", "--grid", "65", "--output", str(j), "--format", "json"]) == 0
    rows = read_csv(c)[1:]
    doc = json.loads(j.read_text())
    assert doc["columns"] == ["psi", "F"]
    for (a, b), (x, y) in zip(rows, doc["rows"]):
        assert float(a) == float(f"{x:.15g}") and float(b) == float(f"{y:.15g}")


def test_energy_of_written_profile(tmp_path, capsys):
    out = tmp_path / "p.csv"
    run(["solve", "--radius", "3", "--output", str(out)])
    e = json.loads((tmp_path / "p.csv.json").read_text())["result"]["energy"]
    capsys.readouterr()
    assert run(["energy", "--radius", "3", "--input", str(out)]) == 0
    total = float(capsys.readouterr().out.split("total")[1].split()[0])
    assert total == pytest.approx(e, rel=1e-6)


def test_energy_identity_default(capsys):
    assert run(["energy", "--radius", "2"]) == 0
    text = capsys.readouterr().out
    assert f"{6 * math.pi**2 * 2.5:.12g}"[:10] in text


def test_spectrum_identity(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert run(["spectrum", "--radius", "1", "--modes", "3", "--output", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0] == ["n", "lambda", "analytic_lambda", "abs_error"]
    lam = [float(r[1]) for r in rows[1:]]
    assert lam == pytest.approx([1, 16, 37], rel=1e-10)
    assert "lambda_2" in capsys.readouterr().out


def test_spectrum_fd_and_skyrmion(tmp_path):
    out = tmp_path / "s.json"
    assert run(["spectrum", "--radius", "2", "--modes", "2", "--method", "fd",
                "--about", "skyrmion", "--output", str(out), "--format", "json"]) == 0
    doc = json.loads(out.read_text())
    assert doc["rows"][0][1] > 0 and doc["rows"][0][2] is None
    assert doc["metadata"]["parameters"]["method"] == "fd"


def test_spectrum_skyrmion_missing_below_critical():
    assert run(["spectrum", "--radius", "1", "--about", "skyrmion"]) == 1


def test_critical(capsys):
    assert run(["critical", "--tol", "1e-10"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert abs(float(lines[0].split()[-1]) - math.sqrt(2)) <= 1e-8
    assert float(lines[2].split()[-1]) == pytest.approx(math.sqrt(2), abs=1e-12)


def test_branch_csv_and_sidecar(tmp_path):
    out = tmp_path / "b.csv"
    assert run(["branch", "--radius-min", "1.3", "--radius-max", "1.6", "--steps", "3",
                "--no-refine", "--output", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0] == ["L", "branch", "slope0", "energy", "lambda0", "x_meas"]
    assert {r[1] for r in rows[1:]} == {"identity", "skyrmion_plus", "skyrmion_minus"}
    meta = json.loads((tmp_path / "b.csv.json").read_text())
    assert meta["sweep"]["tol"] == 1e-6 and meta["parameters"]["steps"] == 3


def test_perturb_table(tmp_path):
    out = tmp_path / "p.csv"
    assert run(["perturb", "--steps", "3", "--amplitude-max", "0.2", "--output", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0] == ["x", "L_adopted", "L_literal", "energy_series", "energy_numeric", "x_meas"]
    x, La, Ll, es, en, xm = map(float, rows[-1])
    assert x == 0.2 and La > Ll > math.sqrt(2)
    assert abs(es - en) / en < 1e-3
    assert xm == pytest.approx(x, rel=0.02)
    assert float(rows[1][4]) == pytest.approx(9 * math.sqrt(2) * math.pi**2, rel=1e-12)


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        ["solve"],
        ["solve", "--radius", "-1"],
        ["solve", "--radius", "2", "--unknown"],
        ["spectrum", "--radius", "1", "--method", "qr"],
        ["spectrum", "--radius", "1", "--modes", "0"],
        ["energy", "--radius", "1", "--input", "/nonexistent.csv"],
        ["solve", "--radius", "2", "--output", "/nonexistent/dir/x.csv"],
        ["branch", "--radius-min", "2", "--radius-max", "1"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    assert run(argv) == 2
    assert capsys.readouterr().err


def test_nonconvergence_exit_1():
    # a tolerance no polished solution can meet
    assert run(["solve", "--radius", "3", "--tol", "1e-30", "--output", "/dev/null"]) == 1


def test_module_entry_point(tmp_path):
    out = tmp_path / "c.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "skyrme_s3", "critical", "--tol", "1e-8", "--output", str(out)],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert "1.41421356" in proc.stdout
    assert read_csv(out)[0] == ["numerical", "closed_form", "analytic"]
