"""Waveform constraint sets and the maps the solver needs on them.

Three feasible sets are supported, each a product of per-entry regions in the
complex plane:

* :class:`ConstantModulus` -- every entry on a circle of fixed radius,
* :class:`AnnulusModulus` -- entry magnitudes inside an annulus,
* :class:`ConstantModulusSimilarity` -- fixed radius plus an entrywise
  distance bound to a reference waveform, which restricts each phase to an
  arc around the reference phase.

For each set the module provides tangent-space projection, the Euclidean
nearest-point retraction, a feasibility residual, and seeded feasible-point
sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import _kernels

FEASIBILITY_TOL = 1e-10
"""Residual below which a vector counts as feasible."""

_REFERENCE_MODULUS_TOL = 1e-12


@dataclass(frozen=True)
class ConstantModulus:
    """Product of circles: |s_n| = modulus for every entry."""

    modulus: float

    def __post_init__(self) -> None:
        if not self.modulus > 0.0:
            raise ValueError(f"modulus must be positive, got {self.modulus}")


@dataclass(frozen=True)
class AnnulusModulus:
    """Entry magnitudes confined to [center_modulus - eps_lo, center_modulus + eps_hi]."""

    center_modulus: float
    eps_lo: float
    eps_hi: float

    def __post_init__(self) -> None:
        if not self.center_modulus > 0.0:
            raise ValueError(f"center_modulus must be positive, got {self.center_modulus}")
        if not 0.0 <= self.eps_lo <= self.center_modulus:
            raise ValueError(
                f"eps_lo must lie in [0, center_modulus], got {self.eps_lo}"
            )
        if not self.eps_hi >= 0.0:
            raise ValueError(f"eps_hi must be nonnegative, got {self.eps_hi}")

    @property
    def lo(self) -> float:
        return self.center_modulus - self.eps_lo

    @property
    def hi(self) -> float:
        return self.center_modulus + self.eps_hi


@dataclass(frozen=True, eq=False)
class ConstantModulusSimilarity:
    """Circles of fixed radius with phases confined near a reference waveform.

    The similarity bound max_n |s_n - reference_n| <= eps, combined with the
    modulus constraint, restricts each phase to the arc of half-width
    ``delta = 2 arcsin(min(eps / (2 modulus), 1))`` around the reference
    phase (chord length on a circle of radius c is 2c|sin(dphi/2)|).  An eps
    of 2*modulus or more makes the bound vacuous and delta saturates at pi.
    """

    modulus: float
    reference: np.ndarray
    eps: float

    def __post_init__(self) -> None:
        if not self.modulus > 0.0:
            raise ValueError(f"modulus must be positive, got {self.modulus}")
        if not 0.0 <= self.eps <= 2.0 * self.modulus:
            raise ValueError(
                f"eps must lie in [0, 2*modulus] = [0, {2.0 * self.modulus}], got {self.eps}"
            )
        ref = np.ascontiguousarray(self.reference, dtype=np.complex128)
        if ref.ndim != 1:
            raise ValueError("reference must be a 1-D complex vector")
        off = np.max(np.abs(np.abs(ref) - self.modulus)) if ref.size else 0.0
        if off > _REFERENCE_MODULUS_TOL:
            raise ValueError(
                f"reference entries must have magnitude {self.modulus} "
                f"(worst deviation {off:.3e})"
            )
        ref.flags.writeable = False
        object.__setattr__(self, "reference", ref)
        object.__setattr__(self, "_reference_phase", np.angle(ref))
        self._reference_phase.flags.writeable = False

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConstantModulusSimilarity):
            return NotImplemented
        return (
            self.modulus == other.modulus
            and self.eps == other.eps
            and self.reference.shape == other.reference.shape
            and bool(np.array_equal(self.reference, other.reference))
        )

    @property
    def reference_phase(self) -> np.ndarray:
        return self._reference_phase

    @property
    def delta(self) -> float:
        """Half-width of the admissible phase arc, in radians."""
        return 2.0 * math.asin(min(self.eps / (2.0 * self.modulus), 1.0))


ConstraintSpec = Union[ConstantModulus, AnnulusModulus, ConstantModulusSimilarity]


@dataclass(frozen=True, eq=False)
class Waveform:
    """A stacked transmit code with the constraint set it is meant to live on."""

    data: np.ndarray
    constraint: ConstraintSpec

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.data, dtype=np.complex128)
        if arr.ndim != 1:
            raise ValueError("waveform data must be a 1-D complex vector")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)
        ref = getattr(self.constraint, "reference", None)
        if ref is not None and ref.shape != arr.shape:
            raise ValueError(
                f"waveform length {arr.size} does not match similarity "
                f"reference length {ref.size}"
            )

    def __len__(self) -> int:
        return self.data.size


def _as_vector(u: np.ndarray, n: int | None = None) -> np.ndarray:
    arr = np.ascontiguousarray(u, dtype=np.complex128)
    if arr.ndim != 1:
        raise ValueError("expected a 1-D complex vector")
    if n is not None and arr.size != n:
        raise ValueError(f"expected a vector of length {n}, got {arr.size}")
    return arr


def project_tangent(point: Waveform, direction: np.ndarray) -> np.ndarray:
    """Orthogonal projection of an ambient direction onto the tangent space.

    For the circle-product sets the tangent space at s is
    {v : Re(conj(v_n) s_n) = 0 for all n} and the projection removes the
    radial component entry by entry.  The annulus set has nonempty interior,
    so its tangent space is the whole ambient space and the direction passes
    through unchanged.
    """
    u = _as_vector(direction, len(point))
    c = point.constraint
    if isinstance(c, AnnulusModulus):
        return u.copy()
    if isinstance(c, (ConstantModulus, ConstantModulusSimilarity)):
        return _kernels.project_circle_tangent(point.data, u, c.modulus)
    raise TypeError(f"unsupported constraint {type(c).__name__}")


def retract(vec: np.ndarray, constraint: ConstraintSpec) -> Waveform:
    """Euclidean nearest feasible point (entrywise, since the sets factor).

    Zero entries are a tie (every phase is equally near); they map to phase 0
    for the modulus sets and to the reference phase for the similarity set so
    runs stay reproducible.  For :class:`AnnulusModulus` a zero entry lands on
    the inner radius.
    """
    u = _as_vector(vec)
    if isinstance(constraint, ConstantModulus):
        out = _kernels.retract_constant_modulus(u, constraint.modulus)
    elif isinstance(constraint, AnnulusModulus):
        out = _kernels.retract_annulus(u, constraint.lo, constraint.hi)
    elif isinstance(constraint, ConstantModulusSimilarity):
        if u.size != constraint.reference.size:
            raise ValueError(
                f"vector length {u.size} does not match similarity "
                f"reference length {constraint.reference.size}"
            )
        out = _kernels.retract_similarity(
            u, constraint.modulus, constraint.reference_phase, constraint.delta
        )
    else:
        raise TypeError(f"unsupported constraint {type(constraint).__name__}")
    return Waveform(out, constraint)


def feasibility_residual(vec: np.ndarray, constraint: ConstraintSpec) -> float:
    """Worst-entry constraint violation; 0 exactly when vec is feasible."""
    u = _as_vector(vec)
    r = np.abs(u)
    if isinstance(constraint, ConstantModulus):
        return float(np.max(np.abs(r - constraint.modulus), initial=0.0))
    if isinstance(constraint, AnnulusModulus):
        below = constraint.lo - r
        above = r - constraint.hi
        return float(max(np.max(below, initial=0.0), np.max(above, initial=0.0), 0.0))
    if isinstance(constraint, ConstantModulusSimilarity):
        if u.size != constraint.reference.size:
            raise ValueError(
                f"vector length {u.size} does not match similarity "
                f"reference length {constraint.reference.size}"
            )
        mod_off = float(np.max(np.abs(r - constraint.modulus), initial=0.0))
        sim_off = float(
            np.max(np.abs(u - constraint.reference) - constraint.eps, initial=0.0)
        )
        return max(mod_off, sim_off, 0.0)
    raise TypeError(f"unsupported constraint {type(constraint).__name__}")


def random_feasible(constraint: ConstraintSpec, n: int, seed: int) -> Waveform:
    """Draw a feasible waveform of length n, deterministic in the seed.

    Phases (and magnitudes, for the annulus set) are sampled uniformly over
    the admissible region.  For the similarity set n must match the reference
    length.
    """
    if n < 1:
        raise ValueError(f"waveform length must be positive, got {n}")
    rng = np.random.default_rng(seed)
    if isinstance(constraint, ConstantModulus):
        phase = rng.uniform(-np.pi, np.pi, size=n)
        data = constraint.modulus * np.exp(1j * phase)
    elif isinstance(constraint, AnnulusModulus):
        phase = rng.uniform(-np.pi, np.pi, size=n)
        mag = rng.uniform(constraint.lo, constraint.hi, size=n)
        data = mag * np.exp(1j * phase)
    elif isinstance(constraint, ConstantModulusSimilarity):
        if n != constraint.reference.size:
            raise ValueError(
                f"length {n} does not match similarity reference "
                f"length {constraint.reference.size}"
            )
        d = constraint.delta
        offsets = rng.uniform(-d, d, size=n)
        data = constraint.modulus * np.exp(
            1j * (constraint.reference_phase + offsets)
        )
    else:
        raise TypeError(f"unsupported constraint {type(constraint).__name__}")
    return Waveform(data, constraint)
