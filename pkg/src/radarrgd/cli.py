"""Command-line front end: single runs and size/stepsize sweeps.

``radarrgd run`` solves one scenario file and writes machine-readable
artifacts into an output directory: a canonical scenario echo, the iteration
trace as CSV, the final waveform as two-column ASCII, a JSON report, and
optionally the ambiguity surface and its slices through the target cell.

``radarrgd sweep`` runs a grid of (array size) x (stepsize rule) solves
described by a matrix file and aggregates one CSV row per run, recording
failures as rows rather than aborting the sweep.

Exit code 0 means every requested solve reached a recorded termination;
configuration and I/O problems exit 1 with a message naming the offender.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from .ambiguity import ambiguity_map, slices, write_csv as write_ambiguity_csv, write_json as write_ambiguity_json
from .config import (
    ScenarioFormatError,
    _as_int,
    _as_real,
    _check_keys,
    _parse_constraint,
    _parse_emitter,
    format_stepsize,
    load_scenario,
    load_waveform,
    parse_stepsize,
    save_scenario,
    save_waveform,
)
from .manifolds import feasibility_residual
from .scene import ArrayConfig, Scenario
from .solver import SolveConfig, SolveTrace, solve

WORKERS_ENV_VAR = "RADARRGD_SWEEP_WORKERS"

STOPPING_NOTE = (
    "stopping defaults (tol_objective, tol_gradnorm, max_iters) are chosen "
    "by this tool; runs report them so results stay self-describing"
)

_SWEEP_COLUMNS = (
    "n_rx",
    "n_tx",
    "n_samples",
    "constraint",
    "stepsize",
    "status",
    "iterations",
    "wall_s",
    "final_sinr_db",
)


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _write_trace(trace: SolveTrace, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SolveTrace.COLUMNS)
        for row in trace.rows():
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _write_json(doc: dict, path: Path) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _nearest_grid_angle(angles: np.ndarray, wanted: float) -> float:
    return float(angles[int(np.argmin(np.abs(angles - wanted)))])


def _write_slice_csv(path: Path, header: tuple[str, str], coords, values) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for c, v in zip(coords, values):
            writer.writerow([f"{c:.10g}", f"{v:.10g}"])


def _cmd_run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    rule = parse_stepsize(args.stepsize)
    config = SolveConfig(
        stepsize=rule,
        max_iters=args.max_iters,
        tol_objective=args.tol_obj,
        tol_gradnorm=args.tol_grad,
        seed=args.seed,
    )
    init = load_waveform(args.init) if args.init is not None else None

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    result = solve(scenario, config, init=init, gamma=args.gamma)
    wall = time.perf_counter() - start

    save_scenario(scenario, out / "scenario.json")
    _write_trace(result.trace, out / "trace.csv")
    save_waveform(result.waveform.data, out / "waveform.txt")
    artifacts = {
        "scenario": "scenario.json",
        "trace": "trace.csv",
        "waveform": "waveform.txt",
        "report": "report.json",
    }

    if args.ambiguity or args.slices:
        grid = ambiguity_map(scenario, result.waveform, result.filter)
        if args.ambiguity:
            write_ambiguity_csv(grid, out / "ambiguity.csv")
            write_ambiguity_json(grid, out / "ambiguity.json")
            artifacts["ambiguity_csv"] = "ambiguity.csv"
            artifacts["ambiguity_json"] = "ambiguity.json"
        if args.slices:
            angle = _nearest_grid_angle(grid.angles, scenario.target.angle)
            angle_slice, range_slice = slices(grid, scenario.target.range_bin, angle)
            _write_slice_csv(
                out / "slice_angle.csv",
                ("angle_deg", "response_db"),
                np.degrees(grid.angles),
                angle_slice,
            )
            _write_slice_csv(
                out / "slice_range.csv",
                ("range_bin", "response_db"),
                grid.ranges,
                range_slice,
            )
            artifacts["slice_angle"] = "slice_angle.csv"
            artifacts["slice_range"] = "slice_range.csv"

    initial_sinr = float(result.trace.sinr_db[0]) if len(result.trace) else None
    report = {
        "tool": {"name": "radarrgd", "version": __version__},
        "timestamp": _utc_now(),
        "backend": _kernels.active_backend(),
        "scenario_file": str(args.scenario),
        "config": {
            "stepsize": format_stepsize(rule),
            "gamma": args.gamma,
            "max_iters": config.max_iters,
            "tol_objective": config.tol_objective,
            "tol_gradnorm": config.tol_gradnorm,
            "seed": config.seed,
            "init": str(args.init) if args.init is not None else "lfm",
            "stopping_note": STOPPING_NOTE,
        },
        "termination": result.termination.value,
        "iterations": result.iterations,
        "wall_s": wall,
        "initial_sinr_db": initial_sinr,
        "final_sinr_db": result.final_sinr_db,
        "feasibility_residual": feasibility_residual(
            result.waveform.data, result.waveform.constraint
        ),
        "artifacts": artifacts,
    }
    _write_json(report, out / "report.json")

    print(
        f"{result.termination.value} after {result.iterations} iterations: "
        f"SINR {initial_sinr:.3f} -> {result.final_sinr_db:.3f} dB "
        f"({wall:.3f} s, backend {_kernels.active_backend()})"
    )
    return 0


_DEFAULT_SWEEP_TARGET = {"range_bin": 0, "angle_deg": 15.0, "power_db": 30.0}
_DEFAULT_SWEEP_INTERFERERS = (
    {"range_bin": 0, "angle_deg": -50.0, "power_db": 20.0},
    {"range_bin": 1, "angle_deg": -10.0, "power_db": 20.0},
    {"range_bin": 2, "angle_deg": 40.0, "power_db": 20.0},
)


def _parse_matrix(doc: dict) -> dict:
    _check_keys(
        doc,
        "sweep matrix",
        ("sizes", "stepsizes"),
        (
            "constraint",
            "gamma",
            "max_iters",
            "tol_objective",
            "tol_gradnorm",
            "seed",
            "target",
            "interferers",
            "noise_power_db",
        ),
    )
    sizes = doc["sizes"]
    if not (isinstance(sizes, list) and sizes):
        raise ScenarioFormatError("'sizes' must be a non-empty list")
    parsed_sizes = []
    for i, triple in enumerate(sizes):
        if not (isinstance(triple, list) and len(triple) == 3):
            raise ScenarioFormatError(
                f"'sizes[{i}]' must be a [n_rx, n_tx, n_samples] triple"
            )
        parsed_sizes.append(tuple(_as_int(v, f"'sizes[{i}]'") for v in triple))
    rules = doc["stepsizes"]
    if not (isinstance(rules, list) and rules):
        raise ScenarioFormatError("'stepsizes' must be a non-empty list")
    parsed_rules = []
    for i, text in enumerate(rules):
        if not isinstance(text, str):
            raise ScenarioFormatError(f"'stepsizes[{i}]' must be a string")
        try:
            parsed_rules.append(parse_stepsize(text))
        except ValueError as exc:
            raise ScenarioFormatError(f"'stepsizes[{i}]': {exc}") from exc
    target = _parse_emitter(
        doc.get("target", _DEFAULT_SWEEP_TARGET), "'target'"
    )
    raw_interferers = doc.get("interferers", list(_DEFAULT_SWEEP_INTERFERERS))
    if not isinstance(raw_interferers, list):
        raise ScenarioFormatError("'interferers' must be a list")
    interferers = tuple(
        _parse_emitter(entry, f"'interferers[{i}]'")
        for i, entry in enumerate(raw_interferers)
    )
    return {
        "sizes": parsed_sizes,
        "rules": parsed_rules,
        "constraint_doc": doc.get("constraint", {"kind": "cm"}),
        "gamma": _as_real(doc.get("gamma", 0.0), "'gamma'"),
        "max_iters": _as_int(doc.get("max_iters", 5000), "'max_iters'"),
        "tol_objective": _as_real(doc.get("tol_objective", 1e-8), "'tol_objective'"),
        "tol_gradnorm": _as_real(doc.get("tol_gradnorm", 1e-6), "'tol_gradnorm'"),
        "seed": _as_int(doc.get("seed", 0), "'seed'"),
        "target": target,
        "interferers": interferers,
        "noise_power_db": _as_real(doc.get("noise_power_db", 0.0), "'noise_power_db'"),
    }


def _sweep_one(entry: dict) -> tuple:
    n_rx, n_tx, n_samples = entry["size"]
    rule = entry["rule"]
    try:
        array = ArrayConfig(n_tx=n_tx, n_rx=n_rx, n_samples=n_samples)
        constraint = _parse_constraint(entry["constraint_doc"], array)
        scenario = Scenario(
            array=array,
            target=entry["target"],
            interferers=entry["interferers"],
            noise_power_db=entry["noise_power_db"],
            constraint=constraint,
        )
        config = SolveConfig(
            stepsize=rule,
            max_iters=entry["max_iters"],
            tol_objective=entry["tol_objective"],
            tol_gradnorm=entry["tol_gradnorm"],
            record_trace=False,
            seed=entry["seed"],
        )
        start = time.perf_counter()
        result = solve(scenario, config, gamma=entry["gamma"])
        wall = time.perf_counter() - start
    except (ValueError, RuntimeError) as exc:
        return (
            n_rx,
            n_tx,
            n_samples,
            entry["constraint_doc"].get("kind", "cm"),
            format_stepsize(rule),
            f"error:{type(exc).__name__}",
            "",
            "",
            "",
        )
    return (
        n_rx,
        n_tx,
        n_samples,
        entry["constraint_doc"].get("kind", "cm"),
        format_stepsize(rule),
        result.termination.value,
        result.iterations,
        repr(wall),
        repr(result.final_sinr_db),
    )


def _cmd_sweep(args: argparse.Namespace) -> int:
    with open(args.matrix) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioFormatError(f"{args.matrix} is not valid JSON: {exc}") from exc
    matrix = _parse_matrix(doc)

    entries = []
    for size in matrix["sizes"]:
        for rule in matrix["rules"]:
            entries.append(
                {
                    "size": size,
                    "rule": rule,
                    "constraint_doc": matrix["constraint_doc"],
                    "gamma": matrix["gamma"],
                    "max_iters": matrix["max_iters"],
                    "tol_objective": matrix["tol_objective"],
                    "tol_gradnorm": matrix["tol_gradnorm"],
                    "seed": matrix["seed"],
                    "target": matrix["target"],
                    "interferers": matrix["interferers"],
                    "noise_power_db": matrix["noise_power_db"],
                }
            )

    workers = int(os.environ.get(WORKERS_ENV_VAR, "1"))
    if workers < 1:
        raise ValueError(f"{WORKERS_ENV_VAR} must be >= 1, got {workers}")

    # JIT-compile the kernels before anything is timed.
    _kernels.warmup()

    if workers == 1:
        rows = [_sweep_one(entry) for entry in entries]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_one, entries))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_SWEEP_COLUMNS)
        writer.writerows(rows)
    report = {
        "tool": {"name": "radarrgd", "version": __version__},
        "timestamp": _utc_now(),
        "backend": _kernels.active_backend(),
        "matrix_file": str(args.matrix),
        "workers": workers,
        "runs": len(rows),
        "stopping": {
            "max_iters": matrix["max_iters"],
            "tol_objective": matrix["tol_objective"],
            "tol_gradnorm": matrix["tol_gradnorm"],
            "note": STOPPING_NOTE,
        },
        "artifacts": {"sweep": "sweep.csv", "report": "report.json"},
    }
    _write_json(report, out / "report.json")
    print(f"wrote {len(rows)} sweep rows to {out / 'sweep.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radarrgd",
        description=(
            "Joint MIMO radar transmit-waveform / receive-filter design by "
            "Riemannian gradient descent"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="solve one scenario file")
    run_p.add_argument("--scenario", type=Path, required=True, help="scenario JSON file")
    run_p.add_argument("--out", type=Path, required=True, help="output directory")
    run_p.add_argument(
        "--ambiguity", action="store_true", help="write the range-angle surface"
    )
    run_p.add_argument(
        "--slices", action="store_true", help="write slices through the target cell"
    )
    run_p.add_argument(
        "--init", type=Path, default=None, help="initial waveform file (default: chirp)"
    )
    run_p.add_argument(
        "--stepsize",
        default="armijo",
        help="'constant:ALPHA' or 'armijo:TAU,BETA,SIGMA' (default: armijo defaults)",
    )
    run_p.add_argument("--gamma", type=float, default=0.0, help="norm augmentation weight")
    run_p.add_argument("--max-iters", type=int, default=5000)
    run_p.add_argument(
        "--tol-obj", type=float, default=1e-8, help="relative objective decrease tolerance"
    )
    run_p.add_argument(
        "--tol-grad", type=float, default=1e-6, help="projected gradient norm tolerance"
    )
    run_p.add_argument("--seed", type=int, default=0)
    run_p.set_defaults(func=_cmd_run)

    sweep_p = sub.add_parser("sweep", help="run a size x stepsize grid of solves")
    sweep_p.add_argument("--matrix", type=Path, required=True, help="sweep matrix JSON file")
    sweep_p.add_argument("--out", type=Path, required=True, help="output directory")
    sweep_p.set_defaults(func=_cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
