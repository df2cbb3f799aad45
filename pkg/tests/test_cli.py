import csv
import json
import subprocess
import sys

import pytest

from qdrive import analysis, harness
from qdrive.cli import main, parse, read_config
from qdrive.propagator import PropagatorConfig


def test_simulate_writes_trajectory(tmp_path):
    out = tmp_path / "traj.csv"
    code = main(["simulate", "--kind", "superadiabatic_tangent", "--omega", "0.5", "--T", "5.9", "--out", str(out)])
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 4097
    assert min(float(r["fidelity"]) for r in rows) > 1 - 1e-9


def test_sweep_single_row_time_to_fidelity(capsys):
    code = main(["sweep", "--kind", "roland_cerf", "--omega", "0.5", "--target-fidelity", "0.9"])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("# ")
    rows = list(csv.DictReader(lines[1:]))
    assert len(rows) == 1
    expected = analysis.time_to_fidelity("roland_cerf", 0.5, 0.9, PropagatorConfig(record_trajectory=False))
    assert float(rows[0]["time"]) == pytest.approx(expected, rel=1e-12)


def test_unknown_flag_is_usage_error(capsys):
    assert main(["simulate", "--bogus", "1"]) == 2
    assert "usage" in capsys.readouterr().err
    assert main([]) == 2


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nkind = lz_linear\nomega = 0.5\nT = 3\nsample_rule = midpoint\nconvergence_check = false\n")
    assert read_config(cfg)[:2] == ["--kind", "lz_linear"]
    command, opts = parse(["simulate", "--config", str(cfg), "--T", "4"])
    assert command == "simulate"
    assert opts["T"] == 4.0 and opts["omega"] == 0.5
    assert opts["sample_rule"] == "midpoint" and opts["convergence_check"] is False


def test_bad_config_key_rejected(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("warp_factor = 9\n")
    assert main(["simulate", "--config", str(cfg)]) == 2


def test_nonconvergence_exit_code(capsys):
    code = main(["simulate", "--kind", "lz_linear", "--omega", "0.5", "--T", "40", "--steps", "16"])
    assert code == 3
    assert "not converged" in capsys.readouterr().err


def test_export_lattice(tmp_path):
    out = tmp_path / "w.csv"
    code = main(["export-lattice", "--kind", "superadiabatic_linear", "--omega", "0.55", "--T", "1", "--samples", "300", "--out", str(out)])
    assert code == 0
    meta = json.loads(out.with_suffix(".json").read_text())
    assert meta["samples"] == 300


def test_figures_writes_six_files(tmp_path, monkeypatch):
    # shrink every grid so the whole command stays quick; the CLI path is what is exercised
    small = {
        "fig2d": dict(omegas=[0.5]),
        "fig2e": dict(durations=[3.0]),
        "fig3c": dict(durations=[1.0]),
        "fig3d": dict(tau_stride=512),
        "fig4a": dict(deviations=[0.0, 0.5]),
        "fig4b": dict(omegas=[0.5]),
    }
    original = harness.builtin_spec
    monkeypatch.setattr(harness, "builtin_spec", lambda name, **kw: original(name, **{**small[name], **kw}))
    assert main(["figures", "--out-dir", str(tmp_path)]) == 0
    assert sorted(p.name for p in tmp_path.glob("*.csv")) == sorted(f"{n}.csv" for n in harness.BUILTIN)


def test_selftest_and_module_entry():
    proc = subprocess.run([sys.executable, "-m", "qdrive", "selftest"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert "FAIL" not in proc.stdout
