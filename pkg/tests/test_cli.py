import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from mixphase import models
from mixphase.cli import main


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "mixphase", *args], capture_output=True,
                          text=True)


@pytest.mark.parametrize("name", ["one_term_unitary", "common_eigenbasis"])
def test_equal_flag(name, capsys):
    assert main(["run", name]) == 0
    out = capsys.readouterr().out
    assert "Gamma[D] = gamma[C]: EQUAL" in out
    assert "result: PASS" in out


@pytest.mark.parametrize("name", ["cone_loop", "phase_damping", "decomposition_freedom",
                                  "nodal_global_phase"])
def test_bundled_runs_pass(name, capsys):
    assert main(["run", name, "--steps", "400"]) == 0
    out = capsys.readouterr().out
    for key in ("relative phase", "geometric phase", "transport residuals", "check"):
        assert key in out


def test_noncommuting_witness_reports_different(capsys):
    assert main(["run", "noncommuting_witness"]) == 0
    assert "DIFFERENT" in capsys.readouterr().out


def test_corrupted_file_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"system_dim": 2,\n "components": [\n')
    res = run_cli("run", str(bad))
    assert res.returncode == 2
    assert f"{bad}:3:" in res.stderr


def test_validation_failure_exits_3(tmp_path, capsys):
    f = tmp_path / "v.json"
    f.write_text(json.dumps({"system_dim": 2, "components": []}))
    assert main(["run", str(f)]) == 3
    assert main(["sweep", "cone_loop", "--param", "nope", "--from", "0", "--to", "1"]) == 3
    assert capsys.readouterr().out == ""


def test_failed_check_exits_1(capsys):
    assert main(["run", "cone_loop", "--steps", "200", "--tol-phase", "1e-20"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_undefined_phase_exits_4(tmp_path, capsys):
    raw = {"system_dim": 2,
           "components": [{"weight": 1.0, "density": {"diag": [0.5 + 1e-3, 0.5 - 1e-3]}}],
           "paths": {"shared": True, "segments": [
               {"hamiltonian": {"pauli": {"X": "pi/2"}}, "duration": 1.0}]}}
    f = tmp_path / "u.json"
    f.write_text(json.dumps(raw))
    assert main(["run", str(f), "--steps", "50"]) == 4
    assert "numerical failure" in capsys.readouterr().out


def test_batch_run_in_order(capsys):
    assert main(["run", "phase_damping", "one_term_unitary", "--workers", "2",
                 "--steps", "200"]) == 0
    out = capsys.readouterr().out
    assert out.index("dephasing") < out.index("one-term")


def _table(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_sweep_matches_closed_form(capsys):
    assert main(["sweep", "cone_loop", "--param", "theta", "--from", "0.1",
                 "--to", "1.5", "--samples", "8", "--steps", "200"]) == 0
    rows = _table(capsys.readouterr().out)
    assert len(rows) == 8
    for row in rows:
        expect = models.cone_loop_phase(0.5, np.cos(float(row["theta"])))
        assert abs(np.angle(np.exp(1j * (float(row["gamma_d"]) - expect)))) < 1e-9
        assert row["status"] == "OK"
        assert len(row["gamma_d"].lstrip("-").replace(".", "").lstrip("0")) <= 12


def test_sweep_zero_length_range(capsys):
    assert main(["sweep", "cone_loop", "--param", "r", "--from", "0.3", "--to", "0.3",
                 "--samples", "5", "--steps", "100"]) == 0
    assert len(_table(capsys.readouterr().out)) == 1


def test_sweep_flags_visibility_zero(capsys):
    assert main(["sweep", "nodal_global_phase", "--param", "alpha", "--from", repr(np.pi - 0.5),
                 "--to", repr(np.pi + 0.5), "--samples", "3", "--steps", "100"]) == 0
    rows = _table(capsys.readouterr().out)
    assert [r["status"] for r in rows] == ["OK", "UNDEFINED", "OK"]
    # the relative phase vanishes at alpha = pi; the geometric phase removes
    # the global phase and stays defined
    assert rows[1]["gamma"] == "nan"
    assert float(rows[1]["gamma_mag"]) < 1e-9
    assert all(np.isfinite(float(r["gamma_d"])) for r in rows)
    assert all(np.isfinite(float(r["gamma"])) for r in (rows[0], rows[2]))


def test_sweep_is_deterministic_across_workers(tmp_path):
    outs = []
    for workers in ("1", "3"):
        target = tmp_path / f"t{workers}.csv"
        res = run_cli("sweep", "phase_damping", "--param", "p", "--from", "0.05",
                      "--to", "0.95", "--samples", "5", "--steps", "100",
                      "--workers", workers, "--output", str(target))
        assert res.returncode == 0, res.stderr
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]


def test_unwrap_removes_jumps(capsys):
    args = ["sweep", "cone_loop", "--param", "theta", "--from", "1.3", "--to", "1.8",
            "--samples", "6", "--steps", "100"]
    assert main(args + ["--unwrap"]) == 0
    g = np.array([float(r["gamma_d"]) for r in _table(capsys.readouterr().out)])
    assert np.abs(np.diff(g)).max() < np.pi


def test_selftest_exits_0(tmp_path):
    witness = tmp_path / "w.json"
    res = run_cli("selftest", "--witness", str(witness))
    assert res.returncode == 0, res.stdout + res.stderr
    lines = [l for l in res.stdout.splitlines() if l.startswith("[")]
    assert len(lines) == 10 and all(l.startswith("[PASS]") for l in lines)
    assert json.loads(witness.read_text())["system_dim"] == 2
