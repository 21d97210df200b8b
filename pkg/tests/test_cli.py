"""Driver tests: config parsing, artifacts, sweeps, self-check."""

from __future__ import annotations

import json
import os

import numpy as np
import pytest

from azmodes import __version__
from azmodes.cli import main


def _write_cfg(tmp_path, name="cfg.json", **over):
    # tiny but nonzero run: two fixed steps on a coarse grid
    cfg = {
        "R": 8.0, "Zmax": 8.0, "nr": 16, "nz": 16,
        "n_base": 2, "n_modes": 1,
        "t_final": 4e-3, "fixed_dt": 2e-3, "record_every": 1,
        "amp_sin": 0.3, "amp_cos": 0.2,
        "amp_temp_sin": 0.1, "amp_temp_cos": 0.1,
        "project_initial": True,
    }
    cfg.update(over)
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def _read_csv(path):
    with open(path) as fh:
        lines = fh.read().strip().split("\n")
    cols = lines[0].split(",")
    rows = [[float(v) for v in ln.split(",")] for ln in lines[1:]]
    return cols, rows


# ---------------------------------------------------------------------------
# config handling
# ---------------------------------------------------------------------------

def test_missing_config_file_exits_with_path(tmp_path):
    with pytest.raises(SystemExit, match="nowhere.json"):
        main([str(tmp_path / "nowhere.json")])


def test_malformed_json_reports_line_and_column(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "nr": 16,\n  "nz": }\n')
    with pytest.raises(SystemExit, match=r"bad\.json:3:\d+:"):
        main([str(path)])


def test_inadmissible_energy_exponent_rejected(tmp_path):
    path = _write_cfg(tmp_path, energy={"p": 5.5, "alpha": 0.02,
                                        "beta": 0.5})
    with pytest.raises(SystemExit, match="beta"):
        main([path])


def test_unknown_config_key_rejected(tmp_path):
    path = _write_cfg(tmp_path, viscosity=2.0)
    with pytest.raises(SystemExit, match="viscosity"):
        main([path])


def test_aliases_accepted_for_n_k_t(tmp_path):
    path = tmp_path / "alias.json"
    path.write_text(json.dumps({
        "nr": 16, "nz": 16, "N": 3, "K": 1, "T": 2e-3,
        "fixed_dt": 1e-3, "record_every": 1,
    }))
    out = tmp_path / "out"
    assert main([str(path), "--output-dir", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["n_base"] == 3
    assert manifest["n_modes"] == 1
    assert manifest["config"]["t_final"] == 2e-3


def test_grid_override_parse_error(tmp_path):
    path = _write_cfg(tmp_path)
    with pytest.raises(SystemExit, match="--grid expects"):
        main([path, "--grid", "64by128"])


def test_sweep_parse_error(tmp_path):
    path = _write_cfg(tmp_path)
    with pytest.raises(SystemExit, match="--sweep expects"):
        main([path, "--sweep", "N=8;16"])


# ---------------------------------------------------------------------------
# single runs
# ---------------------------------------------------------------------------

def test_run_writes_expected_artifacts(tmp_path):
    path = _write_cfg(tmp_path)
    out = tmp_path / "run"
    assert main([path, "--output-dir", str(out)]) == 0
    for name in ("diagnostics.csv", "snapshot_initial.npz",
                 "snapshot_final.npz", "status.json", "manifest.json"):
        assert (out / name).exists()
    status = json.loads((out / "status.json").read_text())
    assert status["status"] == "complete"
    assert status["t_reached"] == pytest.approx(4e-3)

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "complete"
    assert manifest["seeds"] is None
    assert manifest["versions"]["azmodes"] == __version__
    assert manifest["versions"]["numpy"] == np.__version__
    assert manifest["config"]["nr"] == 16
    assert manifest["grid"] == {"R": 8.0, "Zmax": 8.0, "nr": 16, "nz": 16}


def test_dump_fields_flag_writes_physical_fields(tmp_path):
    path = _write_cfg(tmp_path)
    out = tmp_path / "run"
    assert main([path, "--output-dir", str(out), "--dump-fields"]) == 0
    with np.load(out / "fields_final.npz") as data:
        assert data["u_r"].shape == (4 * 1 + 4, 16, 16)
        assert data["t"] == pytest.approx(4e-3)


def test_zero_amplitude_run_yields_zero_diagnostics(tmp_path):
    path = _write_cfg(tmp_path, amp_sin=0.0, amp_cos=0.0,
                      amp_temp_sin=0.0, amp_temp_cos=0.0)
    out = tmp_path / "run"
    assert main([path, "--output-dir", str(out)]) == 0
    cols, rows = _read_csv(out / "diagnostics.csv")
    t_idx = cols.index("t")
    assert len(rows) >= 2
    for row in rows:
        for i, val in enumerate(row):
            if i != t_idx:
                assert val == 0.0


def test_runs_are_deterministic(tmp_path):
    path = _write_cfg(tmp_path)
    outs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        assert main([path, "--output-dir", str(out)]) == 0
        outs.append((out / "diagnostics.csv").read_bytes())
    assert outs[0] == outs[1]


def test_overrides_change_the_run(tmp_path):
    path = _write_cfg(tmp_path)
    out = tmp_path / "run"
    assert main([path, "--output-dir", str(out), "--grid", "16x32",
                 "--n-base", "4", "--modes", "2", "--t-final", "2e-3"]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["nz"] == 32
    assert manifest["n_base"] == 4
    assert manifest["n_modes"] == 2
    cols, rows = _read_csv(out / "diagnostics.csv")
    assert rows[-1][cols.index("t")] == pytest.approx(2e-3)
    assert "varpi_2" in cols


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def test_sweep_writes_summary_and_per_n_runs(tmp_path):
    path = _write_cfg(tmp_path, swirl_cos=0.2)
    out = tmp_path / "sweep"
    assert main([path, "--output-dir", str(out), "--sweep", "N=2,4"]) == 0
    assert (out / "sweep_report.txt").exists()
    for n in (2, 4):
        assert (out / f"N{n}" / "diagnostics.csv").exists()
        assert (out / f"N{n}" / "manifest.json").exists()
    with open(out / "sweep_summary.csv") as fh:
        lines = fh.read().strip().split("\n")
    header = lines[0].split(",")
    assert header == ["N", "status", "u_L5T", "lead_L3_sup", "varpi_sum_k2",
                      "varpi_wsum_k2", "u_theta_L2_sup", "swirl_ratio"]
    assert len(lines) == 3
    first = lines[1].split(",")
    assert first[0] == "2"
    assert first[1] == "ok"
    assert float(first[2]) > 0.0
    report = (out / "sweep_report.txt").read_text()
    assert "slope[u_L5T]" in report


def test_sweep_requires_two_values(tmp_path):
    path = _write_cfg(tmp_path)
    with pytest.raises(SystemExit, match="at least two"):
        main([path, "--sweep", "N=8"])


# ---------------------------------------------------------------------------
# self-check
# ---------------------------------------------------------------------------

def test_check_suite_passes(capsys):
    assert main(["--check"]) == 0
    text = capsys.readouterr().out
    assert "5/5 checks passed" in text
    assert "FAIL" not in text
