"""Command line round trips: serialization, files, manifests, exit codes."""

import json
import math
import shutil
import subprocess

import numpy as np
import pytest

from errdisturb import cli, sweep


def parse_csv(text):
    lines = text.strip().split("\n")
    header = lines[0].split(",")
    rows = [
        [None if cell == "" else float(cell) for cell in line.split(",")]
        for line in lines[1:]
    ]
    return header, rows


# ---------------------------------------------------------------- serialization

def test_rows_to_csv_shape():
    rows = sweep.run_scenario(sweep.standard_scenario(samples=5))
    text = cli.rows_to_csv(rows)
    header, parsed = parse_csv(text)
    assert header == list(cli.CSV_COLUMNS)
    assert len(parsed) == 5 and text.endswith("\n")
    by_name = dict(zip(header, parsed[1]))  # phi_oa = pi/2
    assert by_name["phi_oa_rad"] == math.pi / 2
    assert by_name["eps_exact"] == rows[1].report.error  # 17 digits round trip exactly
    assert by_name["eps_exact"] == pytest.approx(math.sqrt(2), abs=1e-15)
    assert by_name["eta_exact"] == pytest.approx(0.0, abs=1e-15)
    assert by_name["eps_est"] is None and by_name["eta_est_sd"] is None
    assert by_name["p_pp"] + by_name["p_pm"] + by_name["p_mp"] + by_name["p_mm"] == pytest.approx(1.0, abs=1e-12)


def test_rows_to_json_mirrors_csv():
    rows = sweep.run_scenario(sweep.standard_scenario(samples=3))
    payload = json.loads(cli.rows_to_json(rows))
    assert payload["columns"] == list(cli.CSV_COLUMNS)
    assert len(payload["rows"]) == 3
    first = dict(zip(payload["columns"], payload["rows"][0]))
    assert first["eps_exact"] == 0.0 and first["eps_est"] is None


# ---------------------------------------------------------------- sweep command

def test_sweep_writes_csv_and_manifest(tmp_path, capsys):
    rc = cli.main(["sweep", "--samples", "5", "--out", str(tmp_path)])
    assert rc == 0
    data = tmp_path / "standard_sweep.csv"
    manifest = tmp_path / "standard_manifest.json"
    assert data.exists() and manifest.exists()
    header, rows = parse_csv(data.read_text())
    assert header == list(cli.CSV_COLUMNS) and len(rows) == 5
    meta = json.loads(manifest.read_text())
    assert meta["tool"] == "errdisturb"
    assert meta["master_seed"] == 0
    assert meta["outputs"] == ["standard_sweep.csv"]
    assert meta["settings"]["path"]["samples"] == 5
    assert "standard_sweep.csv" in capsys.readouterr().out


def test_sweep_json_format(tmp_path):
    assert cli.main(["sweep", "--samples", "3", "--format", "json",
                     "--out", str(tmp_path), "--prefix", "alt"]) == 0
    payload = json.loads((tmp_path / "alt_sweep.json").read_text())
    assert payload["columns"] == list(cli.CSV_COLUMNS)
    assert len(payload["rows"]) == 3


def test_sweep_preset_and_mode(tmp_path):
    rc = cli.main(["sweep", "--preset", "phiB", "--samples", "7",
                   "--mode", "three_state_exact", "--out", str(tmp_path)])
    assert rc == 0
    header, rows = parse_csv((tmp_path / "phi_b_sweep.csv").read_text())
    by_name = dict(zip(header, rows[0]))
    assert by_name["eps_est"] == pytest.approx(by_name["eps_exact"], abs=1e-12)
    assert by_name["eps_est_sd"] == 0.0
    meta = json.loads((tmp_path / "phi_b_manifest.json").read_text())
    assert meta["settings"]["path"]["family"] == "phiB"


# ---------------------------------------------------------------- simulate

def test_simulate_deterministic(tmp_path):
    args = ["simulate", "--samples", "3", "--replicates", "5", "--seed", "123"]
    for sub in ("one", "two"):
        assert cli.main(args + ["--out", str(tmp_path / sub)]) == 0
    text1 = (tmp_path / "one" / "standard_sweep.csv").read_text()
    text2 = (tmp_path / "two" / "standard_sweep.csv").read_text()
    assert text1 == text2
    header, rows = parse_csv(text1)
    by_name = dict(zip(header, rows[1]))
    assert by_name["eps_est"] is not None and by_name["eta_est_sd"] is not None
    meta = json.loads((tmp_path / "one" / "standard_manifest.json").read_text())
    assert meta["master_seed"] == 123
    assert "simulate" in meta["command"]


def test_simulate_seed_changes_estimates(tmp_path):
    base = ["simulate", "--samples", "3", "--replicates", "5"]
    assert cli.main(base + ["--seed", "1", "--out", str(tmp_path / "a")]) == 0
    assert cli.main(base + ["--seed", "2", "--out", str(tmp_path / "b")]) == 0
    text_a = (tmp_path / "a" / "standard_sweep.csv").read_text()
    text_b = (tmp_path / "b" / "standard_sweep.csv").read_text()
    assert text_a != text_b


# ---------------------------------------------------------------- bloch-scan

def test_bloch_scan_grid_and_order(tmp_path):
    rc = cli.main(["bloch-scan", "--quantity", "error", "--grid", "5x9",
                   "--out", str(tmp_path)])
    assert rc == 0
    header, rows = parse_csv((tmp_path / "standard_bloch_error.csv").read_text())
    assert header == list(cli.GRID_COLUMNS)
    assert len(rows) == 45
    sc = sweep.standard_scenario()
    thetas, phis, values = sweep.bloch_scan("error", sc.a, sc.b, sc.psi, shape=(5, 9))
    flat = [(t, p, values[i, j]) for i, t in enumerate(thetas) for j, p in enumerate(phis)]
    for row, (t, p, v) in zip(rows, flat):  # theta-major, 17 digit round trip
        assert row == [t, p, v]
    meta = json.loads((tmp_path / "standard_bloch_error_manifest.json").read_text())
    assert meta["settings"]["bloch_scan"] == {"quantity": "error", "grid": [5, 9]}


def test_bloch_scan_bad_grid(tmp_path, capsys):
    assert cli.main(["bloch-scan", "--grid", "tiny", "--out", str(tmp_path)]) == 1
    assert "grid" in capsys.readouterr().err


# ---------------------------------------------------------------- verify

def test_verify_passes(capsys):
    assert cli.main(["verify", "--seed", "1"]) == 0
    out = capsys.readouterr().out.strip().split("\n")
    names = [name for name, _ in cli.SUITES]
    assert len(out) == len(names)
    for line, name in zip(out, names):
        assert line.startswith(f"PASS {name}:")


# ---------------------------------------------------------------- exit codes

def test_parser_errors_exit_1():
    for argv in ([], ["frobnicate"], ["sweep", "--samples"],
                 ["bloch-scan", "--quantity", "margin"]):
        with pytest.raises(SystemExit) as info:
            cli.main(argv)
        assert info.value.code == 1


def test_preset_config_conflict(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("[path]\nsamples = 5\n")
    rc = cli.main(["sweep", "--preset", "standard", "--config", str(conf),
                   "--out", str(tmp_path)])
    assert rc == 1
    assert capsys.readouterr().err.startswith("error:")


def test_missing_config_file(tmp_path, capsys):
    rc = cli.main(["sweep", "--config", str(tmp_path / "nope.conf")])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_config_error_reports_line(tmp_path, capsys):
    conf = tmp_path / "bad.conf"
    conf.write_text("[path]\nsamples = 1\n")
    assert cli.main(["sweep", "--config", str(conf), "--out", str(tmp_path)]) == 1
    assert "line 2" in capsys.readouterr().err


def test_out_collides_with_file(tmp_path, capsys):
    target = tmp_path / "occupied"
    target.write_text("data")
    rc = cli.main(["sweep", "--samples", "3", "--out", str(target)])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_config_file_drives_run(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text(
        "[path]\nkind = latitude\ntheta_oa = 60 deg\nsamples = 9\n"
        "[output]\nprefix = sixty\n"
    )
    assert cli.main(["sweep", "--config", str(conf), "--out", str(tmp_path)]) == 0
    header, rows = parse_csv((tmp_path / "sixty_sweep.csv").read_text())
    assert len(rows) == 9
    by_name = dict(zip(header, rows[0]))
    assert by_name["theta_oa_rad"] == pytest.approx(math.radians(60), abs=0)


def test_console_script_installed():
    exe = shutil.which("errdisturb")
    if exe is None:
        pytest.skip("console script not on PATH")
    proc = subprocess.run([exe, "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip().startswith("errdisturb ")
