"""Shared scenario builders and session-scoped converged runs."""

from __future__ import annotations

import math

import numpy as np
import pytest

import radarrgd as rr


def desk_emitters():
    target = rr.Emitter.from_degrees(0, 15.0, 30.0)
    interferers = (
        rr.Emitter.from_degrees(0, -50.0, 20.0),
        rr.Emitter.from_degrees(1, -10.0, 20.0),
        rr.Emitter.from_degrees(2, 40.0, 20.0),
    )
    return target, interferers


def make_desk_scenario(kind: str = "cm", n_rx: int = 10, n_tx: int = 10, n: int = 8):
    """The three-interferer benchmark scene at a configurable size."""
    array = rr.ArrayConfig(n_tx=n_tx, n_rx=n_rx, n_samples=n)
    c = 1.0 / math.sqrt(array.waveform_dim)
    if kind == "cm":
        constraint = rr.ConstantModulus(c)
    elif kind == "eps_cm":
        constraint = rr.AnnulusModulus(c, 0.2 * c, 0.2 * c)
    elif kind == "cms":
        constraint = rr.ConstantModulusSimilarity(
            modulus=c, reference=rr.lfm_init(array).data, eps=c
        )
    else:
        raise ValueError(kind)
    target, interferers = desk_emitters()
    return rr.Scenario(array, target, interferers, 0.0, constraint)


def random_scenario(rng: np.random.Generator, n_tx=None, n_rx=None, n=None, k=None):
    """Small random problem instance for gradient/receiver checks."""
    n_tx = int(rng.integers(1, 4)) if n_tx is None else n_tx
    n_rx = int(rng.integers(1, 4)) if n_rx is None else n_rx
    n = int(rng.integers(1, 4)) if n is None else n
    k = int(rng.choice([0, 1, 3])) if k is None else k
    array = rr.ArrayConfig(n_tx=n_tx, n_rx=n_rx, n_samples=n)
    angles = rng.permutation(np.linspace(-75.0, 75.0, 11))
    # the target stays strictly inside the code support so A0 s cannot vanish
    target = rr.Emitter.from_degrees(int(rng.integers(0, n)), angles[0], 30.0)
    interferers = tuple(
        rr.Emitter.from_degrees(
            int(rng.integers(0, n + 1)), angles[1 + i], float(rng.uniform(10.0, 25.0))
        )
        for i in range(k)
    )
    c = 1.0 / math.sqrt(array.waveform_dim)
    return rr.Scenario(array, target, interferers, 0.0, rr.ConstantModulus(c))


def random_waveform(rng: np.random.Generator, dim: int) -> np.ndarray:
    return (rng.standard_normal(dim) + 1j * rng.standard_normal(dim)) / math.sqrt(dim)


@pytest.fixture(scope="session")
def desk_cm_result():
    rr.warmup()
    return rr.solve(make_desk_scenario("cm"), rr.SolveConfig())


@pytest.fixture(scope="session")
def desk_cm_scenario():
    return make_desk_scenario("cm")
