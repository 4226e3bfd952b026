import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

import radarrgd as rr
from radarrgd.cli import main
from conftest import make_desk_scenario


def write_scene(tmp_path, kind="cm", size=(3, 3, 3)):
    n_rx, n_tx, n = size
    sc = make_desk_scenario(kind, n_rx=n_rx, n_tx=n_tx, n=n)
    path = tmp_path / "scene.json"
    rr.save_scenario(sc, path)
    return sc, path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_run_writes_core_artifacts(tmp_path, capsys):
    sc, scene = write_scene(tmp_path)
    out = tmp_path / "out"
    assert main(["run", "--scenario", str(scene), "--out", str(out)]) == 0
    for name in ("scenario.json", "trace.csv", "waveform.txt", "report.json"):
        assert (out / name).stat().st_size > 0
    assert rr.load_scenario(out / "scenario.json") == sc
    report = json.loads((out / "report.json").read_text())
    assert report["tool"]["name"] == "radarrgd"
    assert report["termination"] in ("objective_tol", "grad_tol", "max_iters")
    assert report["config"]["stepsize"] == "armijo:0.4,0.85,1.0"
    assert "stopping" in report["config"]["stopping_note"]
    assert report["feasibility_residual"] <= rr.FEASIBILITY_TOL
    assert "SINR" in capsys.readouterr().out


def test_run_report_sinr_recomputable_from_artifacts(tmp_path):
    _, scene = write_scene(tmp_path)
    out = tmp_path / "out"
    assert main(["run", "--scenario", str(scene), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    echoed = rr.load_scenario(out / "scenario.json")
    s = rr.load_waveform(out / "waveform.txt")
    ops = rr.ProblemOperators.from_scenario(echoed, gamma=report["config"]["gamma"])
    recomputed = rr.sinr_db(ops, s, rr.rx_optimal(ops, s))
    assert math.isclose(recomputed, report["final_sinr_db"], rel_tol=1e-9)


def test_run_trace_row_count_and_layout(tmp_path):
    _, scene = write_scene(tmp_path)
    out = tmp_path / "out"
    assert main(["run", "--scenario", str(scene), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    rows = read_csv(out / "trace.csv")
    assert rows[0] == list(rr.SolveTrace.COLUMNS)
    assert len(rows) == report["iterations"] + 2
    assert [int(r[0]) for r in rows[1:]] == list(range(report["iterations"] + 1))


def test_run_max_iters_zero(tmp_path):
    _, scene = write_scene(tmp_path)
    out = tmp_path / "out"
    rc = main(["run", "--scenario", str(scene), "--out", str(out), "--max-iters", "0"])
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert report["termination"] == "max_iters"
    assert report["iterations"] == 0
    assert len(read_csv(out / "trace.csv")) == 2
    assert report["initial_sinr_db"] == report["final_sinr_db"]


def test_run_constant_stepsize_flag(tmp_path):
    _, scene = write_scene(tmp_path)
    out = tmp_path / "out"
    rc = main(
        [
            "run", "--scenario", str(scene), "--out", str(out),
            "--stepsize", "constant:0.001", "--max-iters", "5",
        ]
    )
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert report["config"]["stepsize"] == "constant:0.001"
    rows = read_csv(out / "trace.csv")
    steps = [float(r[3]) for r in rows[2:]]
    assert steps == [0.001] * len(steps)
    assert all(int(r[4]) == 0 for r in rows[1:])


def test_run_custom_init_roundtrip(tmp_path):
    sc, scene = write_scene(tmp_path)
    start = rr.random_feasible(sc.constraint, sc.array.waveform_dim, seed=11)
    init_path = tmp_path / "start.txt"
    rr.save_waveform(start.data, init_path)
    out = tmp_path / "out"
    rc = main(
        ["run", "--scenario", str(scene), "--out", str(out), "--init", str(init_path)]
    )
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert report["config"]["init"] == str(init_path)


def test_run_infeasible_init_fails_cleanly(tmp_path, capsys):
    sc, scene = write_scene(tmp_path)
    init_path = tmp_path / "bad.txt"
    rr.save_waveform(1.5 * rr.lfm_init(sc.array).data, init_path)
    out = tmp_path / "out"
    rc = main(
        ["run", "--scenario", str(scene), "--out", str(out), "--init", str(init_path)]
    )
    assert rc == 1
    err = capsys.readouterr().err
    assert err.startswith("error:")
    assert "ConstantModulus" in err


def test_run_rejects_malformed_scenario(tmp_path, capsys):
    path = tmp_path / "scene.json"
    doc = {
        "array": {"n_tx": 2, "n_rx": 2, "n_samples": 2},
        "target": {"range_bin": 0, "angle_deg": 15.0, "power_db": 30.0},
        "noise_power_db": 0.0,
        "constraint": {"kind": "cm"},
        "bogus_key": 1,
    }
    path.write_text(json.dumps(doc))
    assert main(["run", "--scenario", str(path), "--out", str(tmp_path / "o")]) == 1
    assert "bogus_key" in capsys.readouterr().err


def test_run_missing_scenario_file(tmp_path, capsys):
    rc = main(
        ["run", "--scenario", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o")]
    )
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_run_bad_stepsize_text(tmp_path, capsys):
    _, scene = write_scene(tmp_path)
    rc = main(
        [
            "run", "--scenario", str(scene), "--out", str(tmp_path / "o"),
            "--stepsize", "newton:0.1",
        ]
    )
    assert rc == 1
    assert "stepsize" in capsys.readouterr().err


def test_run_ambiguity_and_slices(tmp_path):
    sc, scene = write_scene(tmp_path)
    out = tmp_path / "out"
    rc = main(
        ["run", "--scenario", str(scene), "--out", str(out), "--ambiguity", "--slices"]
    )
    assert rc == 0
    surface = json.loads((out / "ambiguity.json").read_text())
    assert surface["response"] == "receive_filter_output_power"
    assert np.max(surface["values"]) == 1.0
    amb_rows = read_csv(out / "ambiguity.csv")
    assert len(amb_rows) == sc.array.n_samples + 2
    angle_rows = read_csv(out / "slice_angle.csv")
    assert angle_rows[0] == ["angle_deg", "response_db"]
    assert len(angle_rows) == 182
    range_rows = read_csv(out / "slice_range.csv")
    assert range_rows[0] == ["range_bin", "response_db"]
    assert len(range_rows) == sc.array.n_samples + 2
    report = json.loads((out / "report.json").read_text())
    assert report["artifacts"]["ambiguity_csv"] == "ambiguity.csv"
    assert report["artifacts"]["slice_angle"] == "slice_angle.csv"


def sweep_matrix(tmp_path, **overrides):
    doc = {
        "sizes": [[2, 2, 2], [3, 3, 3]],
        "stepsizes": ["armijo", "constant:0.001"],
        "max_iters": 60,
    }
    doc.update(overrides)
    path = tmp_path / "matrix.json"
    path.write_text(json.dumps(doc))
    return path


def test_sweep_grid_rows_in_order(tmp_path):
    matrix = sweep_matrix(tmp_path)
    out = tmp_path / "out"
    assert main(["sweep", "--matrix", str(matrix), "--out", str(out)]) == 0
    rows = read_csv(out / "sweep.csv")
    assert rows[0] == [
        "n_rx", "n_tx", "n_samples", "constraint", "stepsize", "status",
        "iterations", "wall_s", "final_sinr_db",
    ]
    assert len(rows) == 5
    assert [r[:3] for r in rows[1:]] == [
        ["2", "2", "2"], ["2", "2", "2"], ["3", "3", "3"], ["3", "3", "3"],
    ]
    assert [r[4] for r in rows[1:]] == [
        "armijo:0.4,0.85,1.0", "constant:0.001",
        "armijo:0.4,0.85,1.0", "constant:0.001",
    ]
    for r in rows[1:]:
        assert r[5] in ("objective_tol", "grad_tol", "max_iters", "backtrack_exhausted")
        assert int(r[6]) >= 0
        float(r[8])
    report = json.loads((out / "report.json").read_text())
    assert report["runs"] == 4
    assert report["workers"] == 1


def test_sweep_reruns_identical_except_wall_clock(tmp_path):
    matrix = sweep_matrix(tmp_path)
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["sweep", "--matrix", str(matrix), "--out", str(out)]) == 0
        outs.append(read_csv(out / "sweep.csv"))
    scrub = lambda rows: [r[:7] + r[8:] for r in rows]
    assert scrub(outs[0]) == scrub(outs[1])


def test_sweep_parallel_workers_match_serial(tmp_path, monkeypatch):
    matrix = sweep_matrix(tmp_path)
    serial = tmp_path / "serial"
    assert main(["sweep", "--matrix", str(matrix), "--out", str(serial)]) == 0
    monkeypatch.setenv(rr.cli.WORKERS_ENV_VAR, "2")
    parallel = tmp_path / "parallel"
    assert main(["sweep", "--matrix", str(matrix), "--out", str(parallel)]) == 0
    scrub = lambda rows: [r[:7] + r[8:] for r in rows]
    assert scrub(read_csv(serial / "sweep.csv")) == scrub(read_csv(parallel / "sweep.csv"))
    report = json.loads((parallel / "report.json").read_text())
    assert report["workers"] == 2


def test_sweep_records_per_run_failures(tmp_path):
    matrix = sweep_matrix(
        tmp_path,
        target={"range_bin": 0, "angle_deg": 15.0, "power_db": 30.0},
        interferers=[{"range_bin": 0, "angle_deg": 15.0, "power_db": 20.0}],
    )
    out = tmp_path / "out"
    assert main(["sweep", "--matrix", str(matrix), "--out", str(out)]) == 0
    rows = read_csv(out / "sweep.csv")
    assert len(rows) == 5
    for r in rows[1:]:
        assert r[5] == "error:ValueError"
        assert r[6] == "" and r[7] == "" and r[8] == ""


def test_sweep_rejects_bad_matrix(tmp_path, capsys):
    path = tmp_path / "matrix.json"
    path.write_text(json.dumps({"stepsizes": ["armijo"]}))
    rc = main(["sweep", "--matrix", str(path), "--out", str(tmp_path / "o")])
    assert rc == 1
    assert "sizes" in capsys.readouterr().err


def test_command_required():
    with pytest.raises(SystemExit):
        main([])


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "radarrgd", "--help"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0
    assert "run" in proc.stdout and "sweep" in proc.stdout
