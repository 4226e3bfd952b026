"""Numerical kernels behind the objective/gradient evaluations and manifold maps.

Two interchangeable backends compute identical quantities:

* ``numba``: JIT-compiled kernels with fused loops (default when numba imports),
* ``numpy``: vectorized numpy/scipy fallback.

Selection happens once at import from the ``RADARRGD_BACKEND`` environment
variable (``auto`` | ``numba`` | ``numpy``) and can be changed at runtime with
:func:`set_backend`.  All kernels expect C-contiguous ``complex128`` /
``float64`` inputs and are pure functions of their arguments.
"""

from __future__ import annotations

import math
import os

import numpy as np
from scipy.linalg import cho_factor, cho_solve

ENV_VAR = "RADARRGD_BACKEND"

__all__ = [
    "active_backend",
    "set_backend",
    "warmup",
    "objective_terms",
    "objective_gradient",
    "project_circle_tangent",
    "retract_constant_modulus",
    "retract_annulus",
    "retract_similarity",
]


# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------

def _interference_covariance(ak, thetas, s):
    """I + sum_k theta_k (A_k s)(A_k s)^H as a dense Hermitian matrix."""
    nr = ak.shape[1]
    m = np.eye(nr, dtype=np.complex128)
    if ak.shape[0]:
        vk = ak @ s
        m += np.einsum("k,ki,kj->ij", thetas, vk, vk.conj())
    return m


def objective_terms_numpy(a0, ak, thetas, gamma, s):
    """Objective value and the quadratic form s^H A0^H M^-1 A0 s.

    Returns ``(g, quad)`` with ``g = -quad + gamma * ||s||^2``.
    """
    v0 = a0 @ s
    m = _interference_covariance(ak, thetas, s)
    y0 = cho_solve(cho_factor(m, lower=True), v0)
    quad = float(np.vdot(v0, y0).real)
    g = -quad + gamma * float(np.vdot(s, s).real)
    return g, quad


def objective_gradient_numpy(a0, ak, thetas, gamma, s):
    """Euclidean (Wirtinger, x2 scaled) gradient of the reduced objective."""
    v0 = a0 @ s
    m = _interference_covariance(ak, thetas, s)
    y0 = cho_solve(cho_factor(m, lower=True), v0)
    grad = -2.0 * (a0.conj().T @ y0) + (2.0 * gamma) * s
    if ak.shape[0]:
        vk = ak @ s
        ck = vk @ y0.conj()                      # y0^H v_k per interferer
        uk = np.einsum("kij,i->kj", ak.conj(), y0)
        grad += 2.0 * np.einsum("k,k,kj->j", thetas, ck, uk)
    return grad


def project_circle_tangent_numpy(s, u, modulus):
    """Remove the radial component of u at s on a product of circles."""
    return u - (np.real(u.conj() * s) / (modulus * modulus)) * s


def retract_constant_modulus_numpy(u, modulus):
    """Nearest point with every entry at the given modulus (phase kept)."""
    r = np.abs(u)
    out = np.where(r > 0.0, u * (modulus / np.where(r > 0.0, r, 1.0)), modulus)
    return np.ascontiguousarray(out, dtype=np.complex128)


def retract_annulus_numpy(u, lo, hi):
    """Clamp entry magnitudes into [lo, hi], keeping phases."""
    r = np.abs(u)
    scale = np.clip(r, lo, hi) / np.where(r > 0.0, r, 1.0)
    out = np.where(r > 0.0, u * scale, lo)
    return np.ascontiguousarray(out, dtype=np.complex128)


def retract_similarity_numpy(u, modulus, ref_phase, delta):
    """Project phases onto arcs of half-width delta around reference phases."""
    two_pi = 2.0 * np.pi
    d = np.mod(np.angle(u) - ref_phase + np.pi, two_pi) - np.pi
    d = np.clip(d, -delta, delta)
    d[np.abs(u) == 0.0] = 0.0
    return np.ascontiguousarray(modulus * np.exp(1j * (ref_phase + d)))


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    HAVE_NUMBA = False

if HAVE_NUMBA:

    @njit(cache=True)
    def _chol_solve_nb(m, b):
        # Hermitian positive-definite solve: cholesky + two triangular sweeps.
        l = np.linalg.cholesky(m)
        n = b.shape[0]
        y = np.empty(n, np.complex128)
        for i in range(n):
            acc = b[i]
            for j in range(i):
                acc -= l[i, j] * y[j]
            y[i] = acc / l[i, i]
        x = np.empty(n, np.complex128)
        for i in range(n - 1, -1, -1):
            acc = y[i]
            for j in range(i + 1, n):
                acc -= np.conj(l[j, i]) * x[j]
            x[i] = acc / np.conj(l[i, i])
        return x

    @njit(cache=True)
    def _build_covariance_nb(ak, thetas, s, vk):
        nr = ak.shape[1]
        m = np.zeros((nr, nr), np.complex128)
        for i in range(nr):
            m[i, i] = 1.0
        for k in range(ak.shape[0]):
            v = ak[k] @ s
            for i in range(nr):
                vk[k, i] = v[i]
            th = thetas[k]
            for i in range(nr):
                tvi = th * v[i]
                for j in range(nr):
                    m[i, j] += tvi * np.conj(v[j])
        return m

    @njit(cache=True)
    def objective_terms_numba(a0, ak, thetas, gamma, s):
        v0 = a0 @ s
        vk = np.empty((ak.shape[0], ak.shape[1]), np.complex128)
        m = _build_covariance_nb(ak, thetas, s, vk)
        y0 = _chol_solve_nb(m, v0)
        quad = 0.0
        for i in range(v0.shape[0]):
            quad += (np.conj(v0[i]) * y0[i]).real
        sn = 0.0
        for i in range(s.shape[0]):
            sn += s[i].real * s[i].real + s[i].imag * s[i].imag
        return -quad + gamma * sn, quad

    @njit(cache=True)
    def objective_gradient_numba(a0, ak, thetas, gamma, s):
        nr = a0.shape[0]
        nt = a0.shape[1]
        v0 = a0 @ s
        vk = np.empty((ak.shape[0], nr), np.complex128)
        m = _build_covariance_nb(ak, thetas, s, vk)
        y0 = _chol_solve_nb(m, v0)
        grad = np.empty(nt, np.complex128)
        for j in range(nt):
            acc = 0.0 + 0.0j
            for i in range(nr):
                acc += np.conj(a0[i, j]) * y0[i]
            grad[j] = -2.0 * acc + (2.0 * gamma) * s[j]
        for k in range(ak.shape[0]):
            ck = 0.0 + 0.0j
            for i in range(nr):
                ck += np.conj(y0[i]) * vk[k, i]
            coef = 2.0 * thetas[k] * ck
            for j in range(nt):
                acc = 0.0 + 0.0j
                for i in range(nr):
                    acc += np.conj(ak[k, i, j]) * y0[i]
                grad[j] += coef * acc
        return grad

    @njit(cache=True)
    def project_circle_tangent_numba(s, u, modulus):
        inv_c2 = 1.0 / (modulus * modulus)
        out = np.empty(u.shape[0], np.complex128)
        for i in range(u.shape[0]):
            out[i] = u[i] - ((np.conj(u[i]) * s[i]).real * inv_c2) * s[i]
        return out

    @njit(cache=True)
    def retract_constant_modulus_numba(u, modulus):
        out = np.empty(u.shape[0], np.complex128)
        for i in range(u.shape[0]):
            r = abs(u[i])
            if r > 0.0:
                out[i] = u[i] * (modulus / r)
            else:
                out[i] = complex(modulus, 0.0)
        return out

    @njit(cache=True)
    def retract_annulus_numba(u, lo, hi):
        out = np.empty(u.shape[0], np.complex128)
        for i in range(u.shape[0]):
            r = abs(u[i])
            if r > 0.0:
                t = r
                if t < lo:
                    t = lo
                elif t > hi:
                    t = hi
                out[i] = u[i] * (t / r)
            else:
                out[i] = complex(lo, 0.0)
        return out

    @njit(cache=True)
    def retract_similarity_numba(u, modulus, ref_phase, delta):
        two_pi = 2.0 * np.pi
        out = np.empty(u.shape[0], np.complex128)
        for i in range(u.shape[0]):
            if abs(u[i]) == 0.0:
                d = 0.0
            else:
                d = math.atan2(u[i].imag, u[i].real) - ref_phase[i]
                d = (d + np.pi) % two_pi - np.pi
                if d > delta:
                    d = delta
                elif d < -delta:
                    d = -delta
            phi = ref_phase[i] + d
            out[i] = modulus * complex(math.cos(phi), math.sin(phi))
        return out

else:
    objective_terms_numba = None
    objective_gradient_numba = None
    project_circle_tangent_numba = None
    retract_constant_modulus_numba = None
    retract_annulus_numba = None
    retract_similarity_numba = None


# ---------------------------------------------------------------------------
# backend selection
# ---------------------------------------------------------------------------

_BACKENDS = {
    "numpy": {
        "objective_terms": objective_terms_numpy,
        "objective_gradient": objective_gradient_numpy,
        "project_circle_tangent": project_circle_tangent_numpy,
        "retract_constant_modulus": retract_constant_modulus_numpy,
        "retract_annulus": retract_annulus_numpy,
        "retract_similarity": retract_similarity_numpy,
    },
}
if HAVE_NUMBA:
    _BACKENDS["numba"] = {
        "objective_terms": objective_terms_numba,
        "objective_gradient": objective_gradient_numba,
        "project_circle_tangent": project_circle_tangent_numba,
        "retract_constant_modulus": retract_constant_modulus_numba,
        "retract_annulus": retract_annulus_numba,
        "retract_similarity": retract_similarity_numba,
    }

_active = "numpy"


def active_backend() -> str:
    """Name of the backend currently bound to the public kernel functions."""
    return _active


def set_backend(name: str) -> None:
    """Bind the public kernel functions to the named backend."""
    global _active, objective_terms, objective_gradient, project_circle_tangent
    global retract_constant_modulus, retract_annulus, retract_similarity
    if name not in ("numpy", "numba"):
        raise ValueError(f"unknown kernel backend {name!r} (use 'numpy' or 'numba')")
    if name == "numba" and not HAVE_NUMBA:
        raise ImportError("numba backend requested but numba is not importable")
    table = _BACKENDS[name]
    objective_terms = table["objective_terms"]
    objective_gradient = table["objective_gradient"]
    project_circle_tangent = table["project_circle_tangent"]
    retract_constant_modulus = table["retract_constant_modulus"]
    retract_annulus = table["retract_annulus"]
    retract_similarity = table["retract_similarity"]
    _active = name


def _resolve_from_env() -> str:
    choice = os.environ.get(ENV_VAR, "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(
            f"{ENV_VAR}={choice!r} is not valid; use 'auto', 'numba' or 'numpy'"
        )
    if choice == "numpy":
        return "numpy"
    if choice == "numba" and not HAVE_NUMBA:
        raise ImportError(f"{ENV_VAR}=numba but numba is not importable")
    return "numba" if HAVE_NUMBA else "numpy"


def warmup() -> None:
    """Run every kernel once on a tiny instance (triggers JIT compilation)."""
    a0 = np.eye(2, dtype=np.complex128)
    ak = 0.1 * np.ones((1, 2, 2), dtype=np.complex128)
    thetas = np.ones(1)
    s = np.array([1.0 + 0.0j, 0.0 + 1.0j]) / math.sqrt(2.0)
    objective_terms(a0, ak, thetas, 0.5, s)
    objective_gradient(a0, ak, thetas, 0.5, s)
    project_circle_tangent(s, s, 1.0 / math.sqrt(2.0))
    retract_constant_modulus(s, 1.0)
    retract_annulus(s, 0.5, 1.5)
    retract_similarity(s, 1.0, np.zeros(2), 0.5)


set_backend(_resolve_from_env())
