import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from geoflow import cli
from geoflow import initial_data as idat
from geoflow import outputs as out
from geoflow import pullback as pb
from geoflow import source_geometry as sg
from geoflow import target_geometry as tg
from geoflow.flows import DiagnosticsRecord, TrajectoryRecord


def small_trajectory(state):
    traj = TrajectoryRecord()
    traj.append(DiagnosticsRecord(0.0, 1.0, 2.0, 0.0, 0))
    traj.append(DiagnosticsRecord(0.1, 1.0, 2.0, 1e-16, 0))
    traj.snapshots.append((0, state))
    return traj


def test_diagnostics_csv_format(tmp_path, line64, s2):
    st = idat.spin_wave(line64, s2)
    path = tmp_path / "diagnostics.csv"
    out.write_diagnostics_csv(str(path), small_trajectory(st))
    text = path.read_text()
    lines = text.split("\n")
    assert lines[0] == "t,energy,nk,tube_defect_pre,step_rejections"
    assert lines[1].startswith("0,1,2,0,0")
    assert "\r" not in text


def test_csv_17_digit_roundtrip():
    x = math.pi * 1e-7
    assert float(out.format_float(x)) == x


def test_snapshot_roundtrip_1d(tmp_path, line64, s2):
    st = idat.spin_wave(line64, s2)
    path = str(tmp_path / "state_0.f64")
    out.write_snapshot(path, st)
    m, sizes, d, arr = out.read_snapshot(path)
    assert (m, sizes, d) == (1, (64,), 3)
    assert np.array_equal(arr, st.points)
    back = out.snapshot_to_state(path, s2, line64)
    assert np.array_equal(back.points, st.points)


def test_snapshot_roundtrip_2d(tmp_path, square32, s2):
    st = idat.random_smooth(square32, s2, seed=1, band=2)
    path = str(tmp_path / "state_1.f64")
    out.write_snapshot(path, st)
    m, sizes, d, arr = out.read_snapshot(path)
    assert (m, sizes, d) == (2, (32, 32), 3)
    assert np.array_equal(arr, st.points)


def test_snapshot_header_layout(tmp_path, line64, s2):
    st = idat.spin_wave(line64, s2)
    path = str(tmp_path / "state_0.f64")
    out.write_snapshot(path, st)
    raw = open(path, "rb").read()
    assert raw[:4] == b"GEOF"
    assert len(raw) == 32 + 64 * 3 * 8
    assert int.from_bytes(raw[4:8], "little") == out.SNAPSHOT_VERSION


def test_snapshot_bad_magic(tmp_path):
    path = str(tmp_path / "bad.f64")
    with open(path, "wb") as f:
        f.write(b"NOPE" + b"\x00" * 28)
    with pytest.raises(IOError):
        out.read_snapshot(path)


def test_manifest_written_last_and_lists_files(tmp_path, line64, s2):
    st = idat.spin_wave(line64, s2)
    payload = out.write_outputs(str(tmp_path), small_trajectory(st),
                                {"scheme": "rk4_project"})
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    for name in manifest["files"]:
        assert (tmp_path / name).exists()
    assert "manifest.json" in manifest["files"]
    assert manifest["config"]["scheme"] == "rk4_project"
    assert not (tmp_path / "manifest.json.tmp").exists()
    assert payload["n_records"] == 2


def run_cli(*argv):
    return cli.main(list(argv))


def test_cli_usage_error_exit_2(capsys):
    code = run_cli("run", "--scheme", "imex-spectral", "--epsilon", "0",
                   "--grid", "16", "--t-final", "0.001")
    assert code == 2


def test_cli_unknown_metric_exit_2():
    code = run_cli("run", "--metric", "hyperbolic", "--grid", "16",
                   "--t-final", "0.001")
    assert code == 2


def test_cli_scenario_target_mismatch_exit_2():
    code = run_cli("run", "--target", "s6", "--scenario", "spin-wave",
                   "--grid", "16", "--t-final", "0.001")
    assert code == 2


def test_cli_io_error_exit_3(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code = run_cli("run", "--grid", "16", "--dt", "1e-3", "--t-final", "0.002",
                   "--out", str(blocker / "sub"))
    assert code == 3


def test_cli_numerical_abort_exit_4(tmp_path):
    code = run_cli("run", "--grid", "16", "--scenario", "spin-wave",
                   "--k-mode", "3", "--dt", "64", "--t-final", "64",
                   "--out", str(tmp_path))
    assert code == 4
    # partial artifacts still written
    assert (tmp_path / "diagnostics.csv").exists()
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert "aborted" in manifest


def test_cli_run_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        code = run_cli("run", "--grid", "32", "--scenario", "random-smooth",
                       "--seed", "11", "--dt", "1e-3", "--t-final", "0.01",
                       "--diagnostics-every", "2", "--snapshot-every", "5",
                       "--out", str(d))
        assert code == 0
    assert (a / "diagnostics.csv").read_bytes() == (b / "diagnostics.csv").read_bytes()
    assert (a / "state_10.f64").read_bytes() == (b / "state_10.f64").read_bytes()


def test_cli_dispersion_accuracy(capsys):
    code = run_cli("dispersion", "--grid", "256", "--dt", "5e-4",
                   "--t-final", "0.5")
    assert code == 0
    out_text = capsys.readouterr().out
    assert "omega_fit" in out_text
    rel = float(out_text.split("rel_err=")[1].split()[0])
    assert rel < 0.01


def test_cli_gauge_report_csv(tmp_path):
    code = run_cli("gauge-report", "--target", "s6", "--grid", "256",
                   "--max-mode", "32", "--out", str(tmp_path))
    assert code == 0
    lines = (tmp_path / "gauge_elimination.csv").read_text().strip().split("\n")
    assert lines[0] == "n,r,p1_growth,corr_norm,corr2_norm"
    assert len(lines) > 4


def test_cli_entrypoint_subprocess():
    proc = subprocess.run([sys.executable, "-m", "geoflow.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0


def test_random_smooth_reproducible(line64, s2):
    a = idat.random_smooth(line64, s2, seed=5)
    b = idat.random_smooth(line64, s2, seed=5)
    assert np.array_equal(a.points, b.points)


def test_spin_wave_energy_closed_form(s2):
    m = sg.flat_metric(512)
    st = idat.spin_wave(m, s2, theta=np.pi / 4, k_mode=2)
    expected = math.pi * 4 * math.sin(math.pi / 4) ** 2
    assert abs(pb.energy(st) - expected) / expected < 1e-3
