import csv
import io
import json
import subprocess
import sys

import pytest

from splab.cli_app import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_verify_default(capsys):
    code, out, err = run(capsys, "verify", "--seed", "0")
    table = rows(out)
    assert code == 0
    inv = [r for r in table if r["kind"] == "invariant"]
    assert inv and all(r["status"] == "pass" for r in inv)
    assert {r["module"] for r in inv} >= {"fourier_core", "op_algebra", "diff_embed", "sp_algebra",
                                          "brownian_sim", "ricci_engine"}
    assert json.loads(err.strip().splitlines()[-1])["command"] == "verify"


def test_verify_strict_reports_reference(capsys):
    code, out, _ = run(capsys, "verify", "--N", "4", "--strict")
    ref = [r for r in rows(out) if r["kind"] == "reference"]
    assert ref and code == 1


@pytest.mark.parametrize("cmd", ["verify", "simulate", "ricci", "embed"])
def test_small_window_rejected(capsys, cmd):
    code, _, err = run(capsys, cmd, "--N", "1")
    assert code == 3 and "N" in err


def test_corrupt_covspec(capsys, tmp_path):
    p = tmp_path / "q.json"
    p.write_text("{ broken")
    code, _, err = run(capsys, "simulate", "--Q", f"file:{p}", "--T", "0.01", "--dt", "0.01")
    assert code == 3 and "covariance" in err


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--dt", "fast"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_ricci_row(capsys):
    code, out, _ = run(capsys, "ricci", "--N", "16", "--lambda", "uniform:0.70710678", "--labels", "mu_re:2,1")
    (r,) = rows(out)
    assert code == 0
    assert (r["kind"], r["a"], r["b"], r["N"]) == ("muRe", "2", "1", "16")
    assert float(r["closed"]) == pytest.approx(-6.125, abs=1e-7)
    assert float(r["abs_diff"]) == pytest.approx(abs(float(r["brute"]) - float(r["closed"])))


def test_ricci_bad_lambda(capsys):
    code, _, err = run(capsys, "ricci", "--N", "4", "--lambda", "uniform:-1")
    assert code == 3 and err.startswith("splab: error: sp_algebra")


def test_simulate_zero(capsys):
    code, out, err = run(capsys, "simulate", "--N", "8", "--Q", "zero", "--dt", "1e-3", "--T", "0.1")
    table = rows(out)
    assert code == 0 and len(table) == 101
    assert all(float(r["residual"]) == 0 for r in table)


def test_simulate_json_and_summary(capsys, tmp_path):
    s = tmp_path / "s.json"
    code, out, _ = run(capsys, "simulate", "--N", "3", "--Q", "power:2", "--dt", "0.01", "--T", "0.05",
                       "--paths", "2", "--format", "json", "--summary", str(s), "--threads", "2")
    assert code == 0
    recs = json.loads(out)
    assert {r["path"] for r in recs} == {0, 1}
    assert json.loads(s.read_text())["paths"] == 2


def test_embed(capsys, tmp_path):
    out_file = tmp_path / "phi.csv"
    code, out, _ = run(capsys, "embed", "--N", "4", "--family", "rotation", "--alpha", "0.5", "--out", str(out_file))
    assert code == 0
    report = json.loads(out)
    assert report["real_residual"] <= 1e-15 and report["omega_residual"] <= 1e-14
    table = rows(out_file.read_text())
    assert len(table) == 64


def test_embed_compose(capsys):
    code, out, _ = run(capsys, "embed", "--N", "4", "--family", "compose", "--parts", "sine:2:0.2,rotation:0.5")
    assert code == 0 and len(rows(out)) == 64
    code, _, err = run(capsys, "embed", "--N", "4", "--family", "compose", "--parts", "sine:2")
    assert code == 3
    code, _, err = run(capsys, "embed", "--N", "4", "--family", "sine", "--k", "2", "--eps", "0.6")
    assert code == 3 and "diff_embed" in err


def test_byte_identical_reruns(tmp_path):
    cmd = [sys.executable, "-m", "splab.cli_app", "simulate", "--N", "3", "--Q", "uniform:1,2",
           "--dt", "0.01", "--T", "0.05", "--paths", "3", "--seed", "4"]
    a = subprocess.run(cmd, capture_output=True, check=True)
    b = subprocess.run(cmd, capture_output=True, check=True)
    assert a.stdout == b.stdout and a.stdout
    prov = json.loads(a.stderr.decode().strip().splitlines()[-1])
    assert prov["seed"] == 4 and prov["version"].startswith("splab")
