"""Range-angle response surface of a designed waveform/filter pair.

The surface is the receive-filter output power chi(r, theta) =
|w^H A(r, theta) s|^2 evaluated on a grid of range bins and angles and
normalized to a unit peak.  This is one of several ambiguity conventions in
use, so serialized grids carry the definition in their metadata.

Cells are evaluated through the snapshot structure of A rather than by
building each operator: with the code matrix S (N_t x N), filter snapshots
W (N x N_r), and steering vectors a_t, a_r,

    w^H A(r, theta) s = sum_n (W[n]^H a_r) * (a_t^T S[:, n - r])

which vectorizes over the whole angle grid at fixed r.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .manifolds import Waveform
from .scene import Scenario, steering_rx, steering_tx

RESPONSE_DEFINITION = "receive_filter_output_power"
"""Identifier for the surface convention, recorded in serialized output."""

__all__ = [
    "AmbiguityGrid",
    "ambiguity_map",
    "slices",
    "write_csv",
    "write_json",
]


@dataclass(frozen=True, eq=False)
class AmbiguityGrid:
    """Normalized response surface on a range x angle grid.

    ``values[i, j]`` is the response at range bin ``ranges[i]`` and angle
    ``angles[j]`` (radians), scaled so the grid maximum is exactly 1.
    """

    ranges: np.ndarray
    angles: np.ndarray
    values: np.ndarray

    @property
    def peak(self) -> tuple[int, float]:
        """(range_bin, angle_radians) of the grid maximum."""
        i, j = np.unravel_index(int(np.argmax(self.values)), self.values.shape)
        return int(self.ranges[i]), float(self.angles[j])

    def values_db(self) -> np.ndarray:
        """Surface in decibels; exact zeros map to -inf."""
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(self.values)


def _default_ranges(scenario: Scenario) -> np.ndarray:
    return np.arange(scenario.array.n_samples + 1)


def _default_angles() -> np.ndarray:
    return np.deg2rad(np.arange(-90.0, 91.0))


def ambiguity_map(
    scenario: Scenario,
    s: Waveform,
    w: np.ndarray,
    ranges: np.ndarray | None = None,
    angles: np.ndarray | None = None,
) -> AmbiguityGrid:
    """Evaluate the normalized response surface on the given grid.

    Defaults cover every range bin 0..N and angles -90..90 degrees in
    1-degree steps.  Rejects empty grids, out-of-support range bins, and an
    identically zero surface (nothing to normalize).
    """
    arr = scenario.array
    rng = _default_ranges(scenario) if ranges is None else np.asarray(ranges)
    ang = _default_angles() if angles is None else np.asarray(angles, dtype=float)
    if rng.size == 0 or ang.size == 0:
        raise ValueError("ambiguity grid must contain at least one range and angle")
    if rng.ndim != 1 or ang.ndim != 1:
        raise ValueError("ranges and angles must be 1-D")
    if not np.issubdtype(rng.dtype, np.integer):
        raise ValueError("range bins must be integers")
    if rng.min() < 0 or rng.max() > arr.n_samples:
        raise ValueError(
            f"range bins must lie in [0, {arr.n_samples}], got "
            f"[{rng.min()}, {rng.max()}]"
        )
    data = s.data if isinstance(s, Waveform) else np.asarray(s)
    if data.shape != (arr.waveform_dim,):
        raise ValueError(
            f"waveform must have shape ({arr.waveform_dim},), got {data.shape}"
        )
    w = np.asarray(w)
    if w.shape != (arr.filter_dim,):
        raise ValueError(
            f"filter must have shape ({arr.filter_dim},), got {w.shape}"
        )

    code = data.reshape(arr.n_samples, arr.n_tx).T          # S, snapshot columns
    filt = w.reshape(arr.n_samples, arr.n_rx)               # snapshot rows
    at = np.stack([steering_tx(a, arr.n_tx) for a in ang])  # (n_angles, N_t)
    ar = np.stack([steering_rx(a, arr.n_rx) for a in ang])  # (n_angles, N_r)
    t = at @ code                                           # a_t^T S[:, m]
    r_resp = ar @ filt.conj().T                             # W[n]^H a_r

    n = arr.n_samples
    values = np.empty((rng.size, ang.size))
    for i, r in enumerate(rng):
        if r >= n:
            values[i] = 0.0
            continue
        inner = np.sum(r_resp[:, r:] * t[:, : n - r], axis=1)
        values[i] = np.abs(inner) ** 2
    peak = values.max()
    if peak <= 0.0:
        raise ValueError("response surface is identically zero; cannot normalize")
    return AmbiguityGrid(
        ranges=np.ascontiguousarray(rng, dtype=np.int64),
        angles=np.ascontiguousarray(ang, dtype=float),
        values=values / peak,
    )


def _find_index(values: np.ndarray, wanted: float, label: str) -> int:
    hits = np.flatnonzero(np.abs(values - wanted) <= 1e-12)
    if hits.size == 0:
        raise ValueError(f"{label} {wanted!r} is not on the grid")
    return int(hits[0])


def slices(
    grid: AmbiguityGrid, at_range: int, at_angle: float
) -> tuple[np.ndarray, np.ndarray]:
    """Extract the angle slice at a range bin and the range slice at an angle.

    Both come back in decibels.  The requested coordinates must be grid
    points (angle matched to 1e-12 radians).
    """
    i = _find_index(grid.ranges.astype(float), float(at_range), "range bin")
    j = _find_index(grid.angles, float(at_angle), "angle")
    db = grid.values_db()
    return db[i, :].copy(), db[:, j].copy()


def write_csv(grid: AmbiguityGrid, path: str | Path) -> None:
    """Write the surface as CSV: angles (degrees) across, range bins down, dB cells."""
    db = grid.values_db()
    angles_deg = np.degrees(grid.angles)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["range_bin"] + [f"{a:.10g}" for a in angles_deg])
        for i, r in enumerate(grid.ranges):
            writer.writerow([int(r)] + [f"{v:.10g}" for v in db[i]])


def write_json(grid: AmbiguityGrid, path: str | Path) -> None:
    """Write the surface with metadata as JSON (normalized linear values)."""
    peak_range, peak_angle = grid.peak
    doc = {
        "response": RESPONSE_DEFINITION,
        "normalization": "unit_peak",
        "ranges": [int(r) for r in grid.ranges],
        "angles_deg": [float(a) for a in np.degrees(grid.angles)],
        "values": [[float(v) for v in row] for row in grid.values],
        "peak": {"range_bin": peak_range, "angle_deg": float(np.degrees(peak_angle))},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
