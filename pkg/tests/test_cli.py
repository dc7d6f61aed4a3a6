import json
import subprocess
import sys

import numpy as np
import pytest

from fks_lab.cli import csv_header, main, read_diagnostics_csv, worker_count
from fks_lab.diagnostics import DiagnosticsSpec, decay_fit

MODEL = "model.d = {d}\nmodel.alpha = {alpha}\nmodel.a = {a}\nmodel.lambda = {lam}\n"


def write_cfg(tmp_path, body, name="cfg.txt"):
    p = tmp_path / name
    p.write_text(body)
    return str(p)


def test_constants_report(tmp_path, capsys):
    cfg = write_cfg(tmp_path, MODEL.format(d=3, alpha=1.5, a=2.0, lam=1.0))
    assert main(["constants", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert "C_crit_fair = 4\n" in (tmp_path / "o" / "constants.txt").read_text()
    assert "C_crit_fair = 4" in capsys.readouterr().out


def test_header_layout():
    spec = DiagnosticsSpec(p_list=(2.0, 1.0, float("inf")), k_list=(2.0, 0.5))
    assert csv_header(spec) == ["t", "mass", "linf", "min", "entropy", "hs_half", "y_blowup",
                                "tail_fraction", "lp_1", "lp_2", "lp_inf", "mk_0.5", "mk_2"]


def test_free_solve_decay(tmp_path):
    """lambda = 0: the L^2 column decays like t^{-(d/alpha)(1 - 1/2)}."""
    body = MODEL.format(d=1, alpha=1.5, a=0.5, lam=0.0) + (
        "grid.L = 64\ngrid.N = 1024\ninitial.sigma = 0.2\nsolver.dt = 0.05\nsolver.T = 10\n"
        "solver.diag_stride = 2\ndiagnostics.p_list = 2\n")
    out = tmp_path / "o"
    assert main(["solve", "--config", write_cfg(tmp_path, body), "--out", str(out)]) == 0
    cols = read_diagnostics_csv(out / "diagnostics.csv")
    slope, r2 = decay_fit(np.column_stack([cols["t"], cols["lp_2"]]), window=(1.0, 10.0))
    assert slope == pytest.approx(-1 / 3, rel=0.02)
    assert r2 > 0.999
    status = json.loads((out / "outcome.json").read_text())
    assert status["status"] == "completed" and status["exit_code"] == 0


@pytest.mark.parametrize("mode, body", [
    ("solve", "grid.N = 64\nsolver.T = 0.05\nsolver.dt = 0.005\n"),
    ("particles", "grid.N = 64\nparticles.N = 200\nparticles.T = 0.1\nparticles.snapshot_stride = 5\n"),
])
def test_byte_identical(tmp_path, mode, body):
    cfg = write_cfg(tmp_path, MODEL.format(d=1, alpha=1.5, a=0.5, lam=1.0) + body)
    outs = [tmp_path / "a", tmp_path / "b"]
    for o in outs:
        assert main([mode, "--config", cfg, "--out", str(o), "--seed", "123"]) == 0
    names = sorted(p.name for p in outs[0].iterdir())
    assert names == sorted(p.name for p in outs[1].iterdir())
    for n in names:
        a, b = ((o / n).read_bytes() for o in outs)
        if n == "config.txt":
            # only the echoed output directory differs
            a, b = (x.replace(str(o).encode(), b"OUT") for x, o in zip((a, b), outs))
        assert a == b


def test_seed_changes_particles(tmp_path):
    cfg = write_cfg(tmp_path, MODEL.format(d=1, alpha=1.5, a=0.5, lam=1.0) + "grid.N = 64\nparticles.N = 50\n"
                    "particles.T = 0.1\n")
    for s in ("1", "2"):
        main(["particles", "--config", cfg, "--out", str(tmp_path / s), "--seed", s])
    assert (tmp_path / "1" / "diagnostics.csv").read_bytes() != (tmp_path / "2" / "diagnostics.csv").read_bytes()


def test_blowup_exit_code(tmp_path):
    body = MODEL.format(d=2, alpha=1.5, a=1.0, lam=8.0) + "solver.dt = 0.002\nsolver.T = 1\n"
    out = tmp_path / "o"
    assert main(["solve", "--config", write_cfg(tmp_path, body), "--out", str(out)]) == 10
    assert json.loads((out / "outcome.json").read_text())["status"] == "blowup"


def test_config_error_exit(tmp_path, capsys):
    cfg = write_cfg(tmp_path, MODEL.format(d=1, alpha=3.0, a=0.5, lam=1.0) + "grid.N = 100\n")
    assert main(["solve", "--config", cfg]) == 64
    err = capsys.readouterr().err
    assert "model.alpha" in err and "grid.N" in err


def test_missing_config_file(tmp_path):
    assert main(["solve", "--config", str(tmp_path / "nope.txt")]) == 64


def test_echoed_config_reparses(tmp_path):
    cfg = write_cfg(tmp_path, MODEL.format(d=2, alpha=1.2, a=1.0, lam=0.5))
    main(["constants", "--config", cfg, "--out", str(tmp_path / "o")])
    echoed = tmp_path / "o" / "config.txt"
    assert main(["constants", "--config", str(echoed), "--out", str(tmp_path / "p")]) == 0
    again = (tmp_path / "p" / "config.txt").read_text()
    assert again.replace(str(tmp_path / "p"), "OUT") == echoed.read_text().replace(str(tmp_path / "o"), "OUT")


def test_blowup_scan(tmp_path, monkeypatch):
    monkeypatch.setenv("FKS_THREADS", "1")
    body = MODEL.format(d=2, alpha=1.5, a=1.0, lam=1.0) + (
        "solver.dt = 0.002\nsolver.T = 0.5\nscan.lam_mass = 0, 8\n")
    out = tmp_path / "scan"
    assert main(["blowup-scan", "--config", write_cfg(tmp_path, body), "--out", str(out)]) == 0
    rows = (out / "phase.csv").read_text().splitlines()
    assert rows[0] == "lam_mass,status,t_end,reason"
    assert rows[1].split(",")[1] == "completed"
    assert rows[2].split(",")[1] == "blowup"
    assert (out / "run_000" / "diagnostics.csv").exists()


def test_worker_count(monkeypatch):
    monkeypatch.setenv("FKS_THREADS", "3")
    assert worker_count(10) == 3 and worker_count(2) == 2
    monkeypatch.setenv("FKS_THREADS", "junk")
    assert worker_count(1) == 1


def test_module_entry_point(tmp_path):
    cfg = write_cfg(tmp_path, MODEL.format(d=1, alpha=1.5, a=0.5, lam=1.0))
    res = subprocess.run([sys.executable, "-m", "fks_lab", "constants", "--config", cfg,
                          "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert res.returncode == 0 and "C_crit_fair" in res.stdout
