import json

import numpy as np
import pytest

from gateid.cli import main
from gateid.quantum import dump_gate, named_gate


def test_identify_exact_stdout(capsys):
    assert main(["identify", "--exact", "-o", "-"]) == 0
    doc = json.loads(capsys.readouterr().out)
    m = np.array([complex(*z) for z in doc["matrix"]]).reshape(2, 2)
    assert np.allclose(m, named_gate("hadamard"), atol=1e-10)
    assert doc["phase_convention"] == "first-entry-real"


def test_identify_writes_file(tmp_path):
    out = tmp_path / "est.json"
    assert main(["identify", "--n-total", "5000", "--seed", "3", "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["seed"] == 3 and doc["n_total_nominal"] == 5000


def test_identify_matrix_file(tmp_path):
    path = tmp_path / "gate.txt"
    u = np.diag([1, 1j])
    dump_gate(u, path)
    out = tmp_path / "est.json"
    assert main(["identify", "--matrix-file", str(path), "--exact", "--phase", "reference", "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["matrix"][3] == pytest.approx([0, 1], abs=1e-10)


def test_identify_usage_errors(tmp_path, capsys):
    assert main(["identify", "--n-total", "10", "-o", str(tmp_path / "x.json")]) == 1
    assert "12" in capsys.readouterr().err
    assert main(["identify", "-o", str(tmp_path / "x.json")]) == 1
    assert main(["identify", "--exact", "--mix-alpha", "0", "-o", "-"]) == 1
    bad = tmp_path / "bad.txt"
    bad.write_text("2\n1,0 1,0\n1,0 1,0\n")
    assert main(["identify", "--matrix-file", str(bad), "--exact", "-o", "-"]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["identify", "--gate", "toffoli"])
    assert exc.value.code == 1


def test_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    out = tmp_path / "est.json"
    cfg.write_text(json.dumps({"n_total": 2000, "seed": 9, "output": str(out)}))
    assert main(["identify", "--config", str(cfg)]) == 0
    assert json.loads(out.read_text())["seed"] == 9
    assert main(["identify", "--config", str(cfg), "--seed", "4"]) == 0
    assert json.loads(out.read_text())["seed"] == 4
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(["identify", "--config", str(cfg)]) == 1
    cfg.write_text("{not json")
    assert main(["identify", "--config", str(cfg)]) == 1


def test_scaling_and_fit_slope(tmp_path, capsys):
    out = tmp_path / "sc"
    args = ["scaling", "--n-grid", "1000", "4000", "16000", "--repetitions", "10", "--out-dir", str(out)]
    assert main(args) == 0
    assert "slope" in capsys.readouterr().out
    summary = json.loads((out / "summary.json").read_text())
    assert main(["fit-slope", str(out / "summary.csv")]) == 0
    fit = json.loads(capsys.readouterr().out)
    assert fit["slope"] == pytest.approx(summary["slope"])
    assert main(["scaling", "--n-grid", "1000", "500", "2000", "--out-dir", str(out)]) == 1
    assert main(["scaling", "--n-grid", "1000", "2000", "--out-dir", str(out)]) == 1


def test_fit_slope_errors(tmp_path):
    assert main(["fit-slope"]) == 1
    assert main(["fit-slope", str(tmp_path / "missing.csv")]) == 1
    short = tmp_path / "s.csv"
    short.write_text("n_nominal,mean_mse\n10,1\n100,0.1\n")
    assert main(["fit-slope", str(short)]) == 1


def test_verify(tmp_path, capsys):
    report = tmp_path / "r.json"
    assert main(["verify", "--max-dim", "3", "--report", str(report)]) == 0
    assert "FAIL" not in capsys.readouterr().out
    assert all(r["passed"] for r in json.loads(report.read_text()))
    assert main(["verify", "--max-dim", "7"]) == 1
    assert main(["verify", "--max-dim", "1"]) == 1


def test_verify_failure_exit_code(monkeypatch):
    import gateid.cli as cli
    from gateid.experiments import CheckResult

    monkeypatch.setattr(cli, "run_verification", lambda *a, **k: [CheckResult("x", False, "")])
    assert main(["verify"]) == 3


def test_runtime_error_exit_code(monkeypatch):
    import gateid.cli as cli

    def boom(*a, **k):
        raise np.linalg.LinAlgError("SVD did not converge")

    monkeypatch.setattr(cli, "identify_gate", boom)
    assert main(["identify", "--exact", "-o", "-"]) == 2


def test_timing(tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert main(["timing", "--qubits", "1", "2", "--shots-rule", "exact", "--repeats", "1", "-o", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 3
    assert main(["timing", "--qubits", "8"]) == 1
