"""Riemannian gradient descent over the waveform constraint sets.

Each iteration projects the Euclidean gradient onto the tangent space at the
current iterate, steps against it (constant stepsize or Armijo backtracking),
and retracts the result back onto the constraint set.  The Armijo rule tests
sufficient decrease at the tangent-space trial point

    g(s) - g(s - tau beta^m d) >= sigma * tau beta^m * ||d||^2

with d the projected gradient, accepting the smallest m that satisfies it.
Sufficient decrease at the tangent point does not prove the retracted
iterate decreases too, so under Armijo the iterate sequence is asserted to
stay monotone; a violation aborts the run with a hint to add a positive
``gamma`` weight, which penalizes the norm growth the retraction removes.

Stopping is governed by three criteria checked in order: projected-gradient
norm below ``tol_gradnorm``, relative objective decrease below
``tol_objective`` for ``OBJECTIVE_STALL_WINDOW`` consecutive iterations, and
an iteration cap.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

import numpy as np

from .manifolds import (
    FEASIBILITY_TOL,
    ConstantModulus,
    Waveform,
    feasibility_residual,
    project_tangent,
    retract,
)
from .objective import (
    ProblemOperators,
    objective_terms,
    rx_optimal,
    sinr_db,
    tx_gradient,
)
from .scene import ArrayConfig, Scenario

OBJECTIVE_STALL_WINDOW = 5
"""Consecutive stalled iterations required before the objective rule stops."""

RETRACTION_SLACK = 1e-9
"""Absolute tolerance on objective growth through the retraction."""

__all__ = [
    "ConstantStep",
    "ArmijoStep",
    "StepsizeRule",
    "SolveConfig",
    "SolveTrace",
    "SolveResult",
    "StepDiagnostics",
    "Termination",
    "BacktrackingError",
    "RetractionIncreaseError",
    "InfeasibleInitError",
    "lfm_init",
    "rgd_step",
    "solve",
]


class BacktrackingError(RuntimeError):
    """Armijo backtracking ran out of trial stepsizes without sufficient decrease."""


class RetractionIncreaseError(RuntimeError):
    """Retraction increased the objective beyond the allowed slack."""


class InfeasibleInitError(ValueError):
    """Initial waveform violates the scenario constraint."""


@dataclass(frozen=True)
class ConstantStep:
    """Fixed stepsize alpha for every iteration."""

    alpha: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha) and self.alpha > 0.0):
            raise ValueError(f"alpha must be positive, got {self.alpha}")


@dataclass(frozen=True)
class ArmijoStep:
    """Backtracking rule: try alpha = tau * beta^m for m = 0, 1, ..."""

    tau: float = 0.4
    beta: float = 0.85
    sigma: float = 1.0
    max_backtracks: int = 80

    def __post_init__(self) -> None:
        if not (math.isfinite(self.tau) and self.tau > 0.0):
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if not (math.isfinite(self.sigma) and self.sigma > 0.0):
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.max_backtracks < 1:
            raise ValueError(f"max_backtracks must be >= 1, got {self.max_backtracks}")


StepsizeRule = Union[ConstantStep, ArmijoStep]


@dataclass(frozen=True)
class SolveConfig:
    """Stepsize rule, stopping criteria, and bookkeeping switches.

    ``max_iters`` may be 0 to evaluate the initialization without stepping.
    The iteration cap is always active, so at least one stopping criterion
    holds no matter how the tolerances are set.  ``seed`` is not consumed by
    the deterministic solve itself; it is recorded in outputs and used by
    callers that draw random feasible starts.
    """

    stepsize: StepsizeRule = field(default_factory=ArmijoStep)
    max_iters: int = 5000
    tol_objective: float = 1e-8
    tol_gradnorm: float = 1e-6
    record_trace: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.stepsize, (ConstantStep, ArmijoStep)):
            raise TypeError(
                f"stepsize must be ConstantStep or ArmijoStep, got "
                f"{type(self.stepsize).__name__}"
            )
        if self.max_iters < 0:
            raise ValueError(f"max_iters must be >= 0, got {self.max_iters}")
        for name in ("tol_objective", "tol_gradnorm"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0.0):
                raise ValueError(f"{name} must be finite and >= 0, got {value}")


class Termination(str, Enum):
    """Why a solve stopped."""

    OBJECTIVE_TOL = "objective_tol"
    GRAD_TOL = "grad_tol"
    MAX_ITERS = "max_iters"
    BACKTRACK_EXHAUSTED = "backtrack_exhausted"


@dataclass(frozen=True, eq=False)
class SolveTrace:
    """Per-iteration history as parallel arrays (one row per visited iterate)."""

    iteration: np.ndarray
    objective: np.ndarray
    sinr_db: np.ndarray
    stepsize: np.ndarray
    backtracks: np.ndarray
    gradnorm: np.ndarray
    residual: np.ndarray
    elapsed_s: np.ndarray

    COLUMNS = (
        "iteration",
        "g",
        "sinr_db",
        "stepsize",
        "backtracks",
        "gradnorm",
        "residual",
        "elapsed_s",
    )

    def __len__(self) -> int:
        return self.iteration.size

    def rows(self):
        """Yield trace rows as tuples in column order."""
        arrays = (
            self.iteration,
            self.objective,
            self.sinr_db,
            self.stepsize,
            self.backtracks,
            self.gradnorm,
            self.residual,
            self.elapsed_s,
        )
        for values in zip(*arrays):
            yield tuple(v.item() if hasattr(v, "item") else v for v in values)


@dataclass(frozen=True, eq=False)
class SolveResult:
    """Final iterate, its optimal receive filter, and the run history."""

    waveform: Waveform
    filter: np.ndarray
    final_sinr_db: float
    trace: SolveTrace
    termination: Termination
    iterations: int


@dataclass(frozen=True)
class StepDiagnostics:
    """What one RGD step did: stepsize taken, backtracks, and objectives."""

    alpha: float
    backtracks: int
    gradnorm: float
    objective_before: float
    objective_after: float


def lfm_init(array: ArrayConfig) -> Waveform:
    """Space-time chirp initialization with unit total energy.

    Entry (k, n) of the N_t x N code matrix (1-based) is
    exp(j 2 pi k (n-1) / N) * exp(j pi (n-1)^2 / N) / sqrt(N N_t); the
    matrix is stacked column by column so snapshot n occupies rows
    (n-1)*N_t .. n*N_t - 1 of the waveform.  Tagged with the default
    constant-modulus constraint c = 1/sqrt(N N_t).
    """
    n_t, n = array.n_tx, array.n_samples
    k = np.arange(1, n_t + 1)[:, None]
    cols = np.arange(n)[None, :]
    code = np.exp(2j * np.pi * k * cols / n) * np.exp(1j * np.pi * cols**2 / n)
    code /= math.sqrt(n * n_t)
    modulus = 1.0 / math.sqrt(n * n_t)
    return Waveform(code.flatten(order="F"), ConstantModulus(modulus))


def _sinr_db_from_quad(snr_scale: float, quad: float) -> float:
    value = snr_scale * quad
    return 10.0 * math.log10(value) if value > 0.0 else -math.inf


def _trial_point(
    ops: ProblemOperators,
    wave: Waveform,
    g_cur: float,
    d: np.ndarray,
    dnorm2: float,
    rule: StepsizeRule,
) -> tuple[np.ndarray, float, int, float | None]:
    """Tangent-space step against the projected gradient d.

    Returns (trial vector, alpha, backtrack count, objective at the trial
    point or None under a constant rule).  Raises :class:`BacktrackingError`
    if Armijo cannot find sufficient decrease.
    """
    if isinstance(rule, ConstantStep):
        return wave.data - rule.alpha * d, rule.alpha, 0, None
    for m in range(rule.max_backtracks + 1):
        alpha = rule.tau * rule.beta**m
        trial = wave.data - alpha * d
        g_trial, _ = objective_terms(ops, trial)
        if g_cur - g_trial >= rule.sigma * alpha * dnorm2:
            return trial, alpha, m, g_trial
    raise BacktrackingError(
        f"no sufficient decrease within {rule.max_backtracks} backtracks "
        f"(gradient norm {math.sqrt(dnorm2):.3e}); the iterate is likely "
        "stationary or the Armijo parameters are ill-set"
    )


def _check_retraction(g_cur: float, g_new: float) -> None:
    if g_new > g_cur + RETRACTION_SLACK:
        raise RetractionIncreaseError(
            f"retraction broke monotonicity: objective rose by "
            f"{g_new - g_cur:.3e} over the previous iterate (allowed slack "
            f"{RETRACTION_SLACK:.0e}); consider a positive gamma "
            "augmentation weight"
        )


def rgd_step(
    ops: ProblemOperators, s: Waveform, rule: StepsizeRule
) -> tuple[Waveform, StepDiagnostics]:
    """One projection/step/retraction cycle from a feasible waveform."""
    g_cur, _ = objective_terms(ops, s)
    d = project_tangent(s, tx_gradient(ops, s))
    dnorm2 = float(np.vdot(d, d).real)
    gradnorm = math.sqrt(dnorm2)
    if dnorm2 == 0.0:
        diag = StepDiagnostics(0.0, 0, 0.0, g_cur, g_cur)
        return s, diag
    trial, alpha, m, g_trial = _trial_point(ops, s, g_cur, d, dnorm2, rule)
    wave_new = retract(trial, s.constraint)
    g_new, _ = objective_terms(ops, wave_new)
    if g_trial is not None:
        _check_retraction(g_cur, g_new)
    return wave_new, StepDiagnostics(alpha, m, gradnorm, g_cur, g_new)


def _prepare_init(scenario: Scenario, init: Waveform | np.ndarray | None) -> Waveform:
    if init is None:
        start = lfm_init(scenario.array)
        data = start.data
    elif isinstance(init, Waveform):
        data = init.data
    else:
        data = np.asarray(init)
    wave = Waveform(data, scenario.constraint)
    residual = feasibility_residual(wave.data, wave.constraint)
    if residual > FEASIBILITY_TOL:
        raise InfeasibleInitError(
            f"initial waveform violates {type(wave.constraint).__name__} "
            f"(residual {residual:.3e} > {FEASIBILITY_TOL:.0e})"
        )
    return wave


def solve(
    scenario: Scenario,
    config: SolveConfig | None = None,
    init: Waveform | np.ndarray | None = None,
    gamma: float = 0.0,
) -> SolveResult:
    """Run RGD from the given (default: chirp) initialization to termination.

    Deterministic in (scenario, config, init): reruns produce bit-identical
    iterates and traces, wall-clock column aside.  Backtracking exhaustion is
    recorded as a termination reason, not raised.
    """
    if config is None:
        config = SolveConfig()
    ops = ProblemOperators.from_scenario(scenario, gamma)
    wave = _prepare_init(scenario, init)
    rule = config.stepsize

    rows: list[tuple] = []
    start = time.perf_counter()
    g_cur, quad_cur = objective_terms(ops, wave)
    prev_alpha = 0.0
    prev_m = 0
    stall = 0
    iteration = 0
    termination = None

    while True:
        d = project_tangent(wave, tx_gradient(ops, wave))
        dnorm2 = float(np.vdot(d, d).real)
        gradnorm = math.sqrt(dnorm2)
        if config.record_trace:
            rows.append(
                (
                    iteration,
                    g_cur,
                    _sinr_db_from_quad(ops.snr_scale, quad_cur),
                    prev_alpha,
                    prev_m,
                    gradnorm,
                    feasibility_residual(wave.data, wave.constraint),
                    time.perf_counter() - start,
                )
            )
        if gradnorm <= config.tol_gradnorm:
            termination = Termination.GRAD_TOL
            break
        if stall >= OBJECTIVE_STALL_WINDOW:
            termination = Termination.OBJECTIVE_TOL
            break
        if iteration >= config.max_iters:
            termination = Termination.MAX_ITERS
            break
        try:
            trial, alpha, m, g_trial = _trial_point(ops, wave, g_cur, d, dnorm2, rule)
        except BacktrackingError:
            termination = Termination.BACKTRACK_EXHAUSTED
            break
        wave_new = retract(trial, wave.constraint)
        g_new, quad_new = objective_terms(ops, wave_new)
        if g_trial is not None:
            _check_retraction(g_cur, g_new)
        rel_decrease = (g_cur - g_new) / max(abs(g_cur), 1e-300)
        stall = stall + 1 if rel_decrease < config.tol_objective else 0
        wave, g_cur, quad_cur = wave_new, g_new, quad_new
        prev_alpha, prev_m = alpha, m
        iteration += 1

    trace = SolveTrace(
        iteration=np.array([r[0] for r in rows], dtype=np.int64),
        objective=np.array([r[1] for r in rows]),
        sinr_db=np.array([r[2] for r in rows]),
        stepsize=np.array([r[3] for r in rows]),
        backtracks=np.array([r[4] for r in rows], dtype=np.int64),
        gradnorm=np.array([r[5] for r in rows]),
        residual=np.array([r[6] for r in rows]),
        elapsed_s=np.array([r[7] for r in rows]),
    )
    w = rx_optimal(ops, wave)
    return SolveResult(
        waveform=wave,
        filter=w,
        final_sinr_db=sinr_db(ops, wave, w),
        trace=trace,
        termination=termination,
        iterations=iteration,
    )
