#!/usr/bin/env python3
"""Time the numba and numpy kernel backends on identical fixed-length solves.

Runs the same Armijo solve for a fixed iteration count under each backend
and reports the best wall time over a few repeats.  The numba backend is
warmed up before timing so JIT compilation is excluded.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

import radarrgd as rr
from radarrgd import _kernels


def build_scenario(n_rx: int, n_tx: int, n: int) -> rr.Scenario:
    array = rr.ArrayConfig(n_tx=n_tx, n_rx=n_rx, n_samples=n)
    target = rr.Emitter.from_degrees(0, 15.0, 30.0)
    interferers = (
        rr.Emitter.from_degrees(0, -50.0, 20.0),
        rr.Emitter.from_degrees(1, -10.0, 20.0),
        rr.Emitter.from_degrees(2, 40.0, 20.0),
    )
    constraint = rr.ConstantModulus(1.0 / math.sqrt(n * n_tx))
    return rr.Scenario(array, target, interferers, 0.0, constraint)


def time_solve(scenario: rr.Scenario, iters: int, repeats: int) -> float:
    # Zero tolerances pin the work to exactly `iters` iterations.
    config = rr.SolveConfig(
        max_iters=iters, tol_objective=0.0, tol_gradnorm=0.0, record_trace=False
    )
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        rr.solve(scenario, config)
        best = min(best, time.perf_counter() - t0)
    return best


def parse_size(text: str) -> tuple[int, int, int]:
    parts = text.split("x")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"size must look like 10x10x8, got {text!r}")
    n_rx, n_tx, n = (int(p) for p in parts)
    return n_rx, n_tx, n


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--sizes",
        type=parse_size,
        nargs="+",
        default=[(4, 4, 4), (10, 10, 8), (10, 10, 30)],
        metavar="NRXxNTXxN",
        help="array sizes to benchmark (default: 4x4x4 10x10x8 10x10x30)",
    )
    parser.add_argument("--iters", type=int, default=300, help="iterations per solve")
    parser.add_argument("--repeats", type=int, default=3, help="repeats, best time kept")
    args = parser.parse_args()

    backends = ["numpy"]
    if _kernels.HAVE_NUMBA:
        backends.insert(0, "numba")
    else:
        print("numba is not importable; timing the numpy backend only")

    results: dict[tuple, dict[str, float]] = {size: {} for size in args.sizes}
    for backend in backends:
        rr.set_backend(backend)
        rr.warmup()
        for size in args.sizes:
            scenario = build_scenario(*size)
            results[size][backend] = time_solve(scenario, args.iters, args.repeats)

    header = f"{'size':>10} {'iters':>6}" + "".join(f"{b + '_s':>12}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for size in args.sizes:
        row = f"{'x'.join(str(v) for v in size):>10} {args.iters:>6}"
        for backend in backends:
            row += f"{results[size][backend]:>12.4f}"
        if len(backends) == 2:
            row += f"{results[size]['numpy'] / results[size]['numba']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
