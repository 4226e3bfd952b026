"""Colocated MIMO radar signal model.

Builds the pieces the optimizer consumes: half-wavelength ULA steering
vectors, range-bin shift matrices, and the response operator A(r, theta)
that maps a stacked transmit code of length N_t*N to the stacked receive
snapshot space of length N_r*N.  Also validates full problem scenarios
(array geometry, target, interferers, noise floor, waveform constraint).

A waveform s stacks the N snapshots of the N_t x N code matrix column by
column: s = [s(1)^T, ..., s(N)^T]^T, and the received snapshot at time n
from a scatterer in range bin r at angle theta is a_r(theta) a_t(theta)^T
s(n - r), zero outside the code support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .manifolds import (
    AnnulusModulus,
    ConstantModulus,
    ConstantModulusSimilarity,
    ConstraintSpec,
)

__all__ = [
    "ArrayConfig",
    "Emitter",
    "Scenario",
    "steering_tx",
    "steering_rx",
    "shift_matrix",
    "response_matrix",
    "interference_operator",
]


@dataclass(frozen=True)
class ArrayConfig:
    """Antenna counts and code length: N_t transmit, N_r receive, N samples."""

    n_tx: int
    n_rx: int
    n_samples: int

    def __post_init__(self) -> None:
        for name in ("n_tx", "n_rx", "n_samples"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
                raise TypeError(f"{name} must be an integer, got {value!r}")
            if value < 1:
                raise ValueError(f"{name} must be >= 1, got {value}")

    @property
    def waveform_dim(self) -> int:
        """Length of the stacked transmit code, N_t * N."""
        return self.n_tx * self.n_samples

    @property
    def filter_dim(self) -> int:
        """Length of the stacked receive filter, N_r * N."""
        return self.n_rx * self.n_samples


def _normalize_angle(angle: float) -> float:
    """Fold an angle onto the front half-plane (-pi/2, pi/2] of the ULA.

    A half-wavelength linear array only sees sin(angle), so rear-half-plane
    angles are folded onto their front-half images with the same sine.
    Exactly -pi/2 has no representative in the half-open interval and is
    rejected.
    """
    a = math.remainder(angle, 2.0 * math.pi)
    if a > 0.5 * math.pi:
        a = math.pi - a
    elif a < -0.5 * math.pi:
        a = -math.pi - a
    if not -0.5 * math.pi < a <= 0.5 * math.pi:
        raise ValueError(
            "emitter angle folds to -pi/2 exactly, which is outside the "
            "representable interval (-pi/2, pi/2]"
        )
    return a


@dataclass(frozen=True)
class Emitter:
    """A point scatterer: range bin, arrival angle (radians), power in dB.

    The angle is normalized at construction; see :func:`_normalize_angle`.
    The upper bound on range_bin depends on the code length and is checked
    where an :class:`ArrayConfig` is available.
    """

    range_bin: int
    angle: float
    power_db: float

    def __post_init__(self) -> None:
        if not isinstance(self.range_bin, (int, np.integer)) or isinstance(
            self.range_bin, bool
        ):
            raise TypeError(f"range_bin must be an integer, got {self.range_bin!r}")
        if self.range_bin < 0:
            raise ValueError(f"range_bin must be >= 0, got {self.range_bin}")
        if not math.isfinite(self.angle):
            raise ValueError(f"angle must be finite, got {self.angle}")
        if not math.isfinite(self.power_db):
            raise ValueError(f"power_db must be finite, got {self.power_db}")
        object.__setattr__(self, "angle", _normalize_angle(float(self.angle)))
        object.__setattr__(self, "range_bin", int(self.range_bin))
        object.__setattr__(self, "power_db", float(self.power_db))

    @classmethod
    def from_degrees(cls, range_bin: int, angle_deg: float, power_db: float) -> "Emitter":
        return cls(range_bin, math.radians(angle_deg), power_db)


@dataclass(frozen=True)
class Scenario:
    """A full design instance: geometry, target, interferers, noise, constraint."""

    array: ArrayConfig
    target: Emitter
    interferers: tuple[Emitter, ...]
    noise_power_db: float
    constraint: ConstraintSpec

    def __post_init__(self) -> None:
        object.__setattr__(self, "interferers", tuple(self.interferers))
        if not math.isfinite(self.noise_power_db):
            raise ValueError(f"noise_power_db must be finite, got {self.noise_power_db}")
        n = self.array.n_samples
        if self.target.range_bin > n:
            raise ValueError(
                f"target range_bin {self.target.range_bin} exceeds code length {n}"
            )
        for i, emitter in enumerate(self.interferers):
            if emitter.range_bin > n:
                raise ValueError(
                    f"interferer {i} range_bin {emitter.range_bin} exceeds "
                    f"code length {n}"
                )
            if emitter.angle == self.target.angle:
                raise ValueError(
                    f"interferer {i} angle coincides with the target angle "
                    f"({math.degrees(self.target.angle):.6g} deg); the receive "
                    "filter cannot separate them"
                )
        if not isinstance(
            self.constraint,
            (ConstantModulus, AnnulusModulus, ConstantModulusSimilarity),
        ):
            raise TypeError(
                f"constraint must be a waveform constraint, got "
                f"{type(self.constraint).__name__}"
            )
        ref = getattr(self.constraint, "reference", None)
        if ref is not None and ref.size != self.array.waveform_dim:
            raise ValueError(
                f"similarity reference length {ref.size} does not match the "
                f"waveform dimension {self.array.waveform_dim}"
            )

    @property
    def interference_ratios(self) -> np.ndarray:
        """Interferer-to-noise power ratios, linear scale, one per interferer."""
        return np.array(
            [10.0 ** ((e.power_db - self.noise_power_db) / 10.0) for e in self.interferers]
        )

    @property
    def snr_scale(self) -> float:
        """Target-to-noise power ratio, linear scale."""
        return 10.0 ** ((self.target.power_db - self.noise_power_db) / 10.0)


def steering_tx(angle: float, n_tx: int) -> np.ndarray:
    """Unit-norm transmit steering vector of a half-wavelength ULA.

    Element m (0-based) is exp(-j pi m sin(angle)) / sqrt(n_tx).
    """
    if n_tx < 1:
        raise ValueError(f"n_tx must be >= 1, got {n_tx}")
    m = np.arange(n_tx)
    return np.exp(-1j * np.pi * m * math.sin(angle)) / math.sqrt(n_tx)


def steering_rx(angle: float, n_rx: int) -> np.ndarray:
    """Unit-norm receive steering vector; same form as :func:`steering_tx`."""
    if n_rx < 1:
        raise ValueError(f"n_rx must be >= 1, got {n_rx}")
    m = np.arange(n_rx)
    return np.exp(-1j * np.pi * m * math.sin(angle)) / math.sqrt(n_rx)


def shift_matrix(range_bin: int, array: ArrayConfig) -> np.ndarray:
    """Binary matrix delaying the stacked waveform by range_bin snapshots.

    Entry (m, n) is 1 exactly when m - n = N_t * range_bin; each range bin
    spans N_t rows.  At range_bin = N the support leaves the index range and
    the matrix is zero.
    """
    if not 0 <= range_bin <= array.n_samples:
        raise ValueError(
            f"range_bin must lie in [0, {array.n_samples}], got {range_bin}"
        )
    dim = array.waveform_dim
    return np.eye(dim, k=-array.n_tx * range_bin)


def response_matrix(range_bin: int, angle: float, array: ArrayConfig) -> np.ndarray:
    """Response operator A(r, theta) = [I_N kron (a_r a_t^T)] J_r.

    Maps a stacked transmit code to the stacked receive snapshots produced by
    a scatterer at (r, theta); shape (N_r*N, N_t*N).  Unlike
    :func:`interference_operator` this takes a raw angle, so ambiguity grids
    may evaluate angles (such as -pi/2) that are invalid for an emitter.
    """
    a_t = steering_tx(angle, array.n_tx)
    a_r = steering_rx(angle, array.n_rx)
    blocks = np.kron(np.eye(array.n_samples), np.outer(a_r, a_t))
    return np.ascontiguousarray(blocks @ shift_matrix(range_bin, array))


def interference_operator(emitter: Emitter, array: ArrayConfig) -> np.ndarray:
    """Response operator for a validated emitter."""
    if emitter.range_bin > array.n_samples:
        raise ValueError(
            f"emitter range_bin {emitter.range_bin} exceeds code length "
            f"{array.n_samples}"
        )
    return response_matrix(emitter.range_bin, emitter.angle, array)
