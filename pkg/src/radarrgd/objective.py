"""Receiver SINR, the closed-form optimal filter, and the reduced objective.

For a waveform s the interference-plus-noise covariance (normalized by the
noise power) is ``M(s) = sum_k ratio_k (A_k s)(A_k s)^H + I``, Hermitian with
smallest eigenvalue >= 1.  The SINR-optimal receive filter has the closed
form ``w* = M^-1 A0 s / (s^H A0^H M^-1 A0 s)``, and substituting it back
reduces the joint design to maximizing ``quad(s) = s^H A0^H M(s)^-1 A0 s``
over the waveform alone.  The solver minimizes the augmented form

    g(s) = -quad(s) + gamma * ||s||^2

whose Euclidean gradient (Wirtinger convention, scaled so that the real
directional derivative along v is Re<grad, v>) is

    grad g = -2 A0^H y0 + 2 gamma s + 2 sum_k ratio_k (y0^H A_k s) A_k^H y0

with y0 = M(s)^-1 A0 s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import _kernels
from .manifolds import Waveform
from .scene import Scenario, interference_operator

SIGNAL_NULL_TOL = 1e-12
"""Below this target-response norm the optimal filter is undefined."""

__all__ = [
    "ProblemOperators",
    "covariance",
    "rx_optimal",
    "sinr",
    "sinr_db",
    "tx_objective",
    "objective_terms",
    "tx_gradient",
]


@dataclass(frozen=True, eq=False)
class ProblemOperators:
    """Precomputed response operators and power ratios for one scenario.

    ``target_op`` is A0 with shape (N_r*N, N_t*N); ``interferer_ops`` stacks
    the K interferer operators into shape (K, N_r*N, N_t*N).  Power ratios
    are linear (relative to the noise floor); ``gamma`` is the augmentation
    weight on ||s||^2 and ``snr_scale`` converts the reduced quadratic form
    into an SINR value.
    """

    target_op: np.ndarray
    interferer_ops: np.ndarray
    interference_ratios: np.ndarray
    gamma: float
    snr_scale: float

    def __post_init__(self) -> None:
        a0 = np.ascontiguousarray(self.target_op, dtype=np.complex128)
        ak = np.ascontiguousarray(self.interferer_ops, dtype=np.complex128)
        ratios = np.ascontiguousarray(self.interference_ratios, dtype=np.float64)
        if a0.ndim != 2:
            raise ValueError("target_op must be a 2-D matrix")
        if ak.ndim != 3 or ak.shape[1:] != a0.shape:
            raise ValueError(
                f"interferer_ops must have shape (K,) + {a0.shape}, got {ak.shape}"
            )
        if ratios.shape != (ak.shape[0],):
            raise ValueError(
                f"expected {ak.shape[0]} interference ratios, got {ratios.shape}"
            )
        if ratios.size and not np.all(ratios > 0.0):
            raise ValueError("interference ratios must be strictly positive")
        if not (math.isfinite(self.gamma) and self.gamma >= 0.0):
            raise ValueError(f"gamma must be finite and >= 0, got {self.gamma}")
        if not (math.isfinite(self.snr_scale) and self.snr_scale > 0.0):
            raise ValueError(f"snr_scale must be positive, got {self.snr_scale}")
        for arr in (a0, ak, ratios):
            arr.flags.writeable = False
        object.__setattr__(self, "target_op", a0)
        object.__setattr__(self, "interferer_ops", ak)
        object.__setattr__(self, "interference_ratios", ratios)
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "snr_scale", float(self.snr_scale))

    @property
    def waveform_dim(self) -> int:
        return self.target_op.shape[1]

    @property
    def filter_dim(self) -> int:
        return self.target_op.shape[0]

    @classmethod
    def from_scenario(cls, scenario: Scenario, gamma: float = 0.0) -> "ProblemOperators":
        a0 = interference_operator(scenario.target, scenario.array)
        ops = [interference_operator(e, scenario.array) for e in scenario.interferers]
        if ops:
            ak = np.stack(ops)
        else:
            ak = np.zeros((0,) + a0.shape, dtype=np.complex128)
        return cls(a0, ak, scenario.interference_ratios, gamma, scenario.snr_scale)


def _as_waveform_data(ops: ProblemOperators, s: Waveform | np.ndarray) -> np.ndarray:
    data = s.data if isinstance(s, Waveform) else np.asarray(s)
    data = np.ascontiguousarray(data, dtype=np.complex128)
    if data.shape != (ops.waveform_dim,):
        raise ValueError(
            f"waveform must have shape ({ops.waveform_dim},), got {data.shape}"
        )
    return data


def covariance(ops: ProblemOperators, s: Waveform | np.ndarray) -> np.ndarray:
    """Noise-normalized interference covariance M(s), Hermitian with eigenvalues >= 1."""
    data = _as_waveform_data(ops, s)
    m = np.eye(ops.filter_dim, dtype=np.complex128)
    if ops.interferer_ops.shape[0]:
        vk = ops.interferer_ops @ data
        m += np.einsum("k,ki,kj->ij", ops.interference_ratios, vk, vk.conj())
    return m


def rx_optimal(ops: ProblemOperators, s: Waveform | np.ndarray) -> np.ndarray:
    """Closed-form SINR-optimal receive filter, normalized so w^H A0 s = 1."""
    data = _as_waveform_data(ops, s)
    v0 = ops.target_op @ data
    norm = float(np.linalg.norm(v0))
    if norm < SIGNAL_NULL_TOL:
        raise ValueError(
            f"target response vanished (||A0 s|| = {norm:.3e}); the optimal "
            "filter is undefined"
        )
    y0 = cho_solve(cho_factor(covariance(ops, data), lower=True), v0)
    quad = float(np.vdot(v0, y0).real)
    return y0 / quad


def sinr(ops: ProblemOperators, s: Waveform | np.ndarray, w: np.ndarray) -> float:
    """Output SINR (linear scale) of waveform s through receive filter w."""
    data = _as_waveform_data(ops, s)
    w = np.ascontiguousarray(w, dtype=np.complex128)
    if w.shape != (ops.filter_dim,):
        raise ValueError(f"filter must have shape ({ops.filter_dim},), got {w.shape}")
    wnorm2 = float(np.vdot(w, w).real)
    if wnorm2 == 0.0:
        raise ValueError("receive filter is the zero vector")
    num = ops.snr_scale * abs(np.vdot(w, ops.target_op @ data)) ** 2
    den = wnorm2
    if ops.interferer_ops.shape[0]:
        vk = ops.interferer_ops @ data
        den += float(ops.interference_ratios @ (np.abs(vk @ w.conj()) ** 2))
    return num / den


def sinr_db(ops: ProblemOperators, s: Waveform | np.ndarray, w: np.ndarray) -> float:
    value = sinr(ops, s, w)
    return 10.0 * math.log10(value) if value > 0.0 else -math.inf


def objective_terms(ops: ProblemOperators, s: Waveform | np.ndarray) -> tuple[float, float]:
    """Augmented objective g(s) together with the quadratic form quad(s).

    The pair comes from one factorization of M(s); ``snr_scale * quad`` is
    the SINR attained by the optimal receive filter, so callers tracking
    both quantities avoid a second solve.
    """
    data = _as_waveform_data(ops, s)
    g, quad = _kernels.objective_terms(
        ops.target_op, ops.interferer_ops, ops.interference_ratios, ops.gamma, data
    )
    return float(g), float(quad)


def tx_objective(ops: ProblemOperators, s: Waveform | np.ndarray) -> float:
    """Reduced transmit objective g(s) = -quad(s) + gamma * ||s||^2."""
    return objective_terms(ops, s)[0]


def tx_gradient(ops: ProblemOperators, s: Waveform | np.ndarray) -> np.ndarray:
    """Euclidean gradient of g; see the module docstring for the convention."""
    data = _as_waveform_data(ops, s)
    return _kernels.objective_gradient(
        ops.target_op, ops.interferer_ops, ops.interference_ratios, ops.gamma, data
    )
