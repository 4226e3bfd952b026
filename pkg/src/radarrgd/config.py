"""Scenario files, waveform files, and stepsize strings.

Scenario files are strict JSON: unknown keys are errors, angles live in
degree keys (``angle_deg``) with a radian escape hatch (``angle_rad``) for
values that have no exact degree representation, and every power is decibels
(10 log10 of the linear value).  :func:`save_scenario` writes a canonical
form that parses back to an identical :class:`~radarrgd.scene.Scenario`,
including bit-exact angles.

Waveform files are plain two-column ASCII (real part, imaginary part), one
entry per line, in the snapshot-major stacking the rest of the library uses.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .manifolds import (
    AnnulusModulus,
    ConstantModulus,
    ConstantModulusSimilarity,
    ConstraintSpec,
)
from .scene import ArrayConfig, Emitter, Scenario
from .solver import ArmijoStep, ConstantStep, StepsizeRule, lfm_init

__all__ = [
    "ScenarioFormatError",
    "load_scenario",
    "parse_scenario",
    "scenario_to_doc",
    "save_scenario",
    "load_waveform",
    "save_waveform",
    "parse_stepsize",
    "format_stepsize",
]


class ScenarioFormatError(ValueError):
    """A scenario document violates the file schema."""


def _check_keys(doc: dict, where: str, required: tuple, optional: tuple = ()) -> None:
    if not isinstance(doc, dict):
        raise ScenarioFormatError(f"{where} must be a JSON object")
    unknown = sorted(set(doc) - set(required) - set(optional))
    if unknown:
        names = ", ".join(f"'{k}'" for k in unknown)
        raise ScenarioFormatError(f"unknown key {names} in {where}")
    missing = sorted(set(required) - set(doc))
    if missing:
        names = ", ".join(f"'{k}'" for k in missing)
        raise ScenarioFormatError(f"missing key {names} in {where}")


def _as_int(value, where: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ScenarioFormatError(f"{where} must be an integer, got {value!r}")
    return value


def _as_real(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioFormatError(f"{where} must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ScenarioFormatError(f"{where} must be finite, got {value!r}")
    return float(value)


def _parse_array(doc: dict) -> ArrayConfig:
    _check_keys(doc, "'array'", ("n_tx", "n_rx", "n_samples"))
    return ArrayConfig(
        n_tx=_as_int(doc["n_tx"], "'array.n_tx'"),
        n_rx=_as_int(doc["n_rx"], "'array.n_rx'"),
        n_samples=_as_int(doc["n_samples"], "'array.n_samples'"),
    )


def _parse_emitter(doc: dict, where: str) -> Emitter:
    _check_keys(doc, where, ("range_bin", "power_db"), ("angle_deg", "angle_rad"))
    has_deg = "angle_deg" in doc
    has_rad = "angle_rad" in doc
    if has_deg == has_rad:
        raise ScenarioFormatError(
            f"{where} needs exactly one of 'angle_deg' or 'angle_rad'"
        )
    if has_deg:
        angle = math.radians(_as_real(doc["angle_deg"], f"{where}.angle_deg"))
    else:
        angle = _as_real(doc["angle_rad"], f"{where}.angle_rad")
    return Emitter(
        range_bin=_as_int(doc["range_bin"], f"{where}.range_bin"),
        angle=angle,
        power_db=_as_real(doc["power_db"], f"{where}.power_db"),
    )


def _parse_reference(value, array: ArrayConfig, where: str) -> np.ndarray:
    if value == "lfm":
        return lfm_init(array).data
    if not isinstance(value, list):
        raise ScenarioFormatError(
            f"{where} must be 'lfm' or a list of [real, imag] pairs"
        )
    out = np.empty(len(value), dtype=np.complex128)
    for i, pair in enumerate(value):
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ScenarioFormatError(f"{where}[{i}] must be a [real, imag] pair")
        out[i] = complex(
            _as_real(pair[0], f"{where}[{i}][0]"), _as_real(pair[1], f"{where}[{i}][1]")
        )
    return out


def _parse_constraint(doc: dict, array: ArrayConfig) -> ConstraintSpec:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ScenarioFormatError("'constraint' must be an object with a 'kind' key")
    kind = doc["kind"]
    default_modulus = 1.0 / math.sqrt(array.waveform_dim)
    if kind == "cm":
        _check_keys(doc, "'constraint'", ("kind",), ("modulus",))
        modulus = (
            _as_real(doc["modulus"], "'constraint.modulus'")
            if "modulus" in doc
            else default_modulus
        )
        return ConstantModulus(modulus)
    if kind == "eps_cm":
        _check_keys(
            doc, "'constraint'", ("kind", "eps_lo", "eps_hi"), ("center_modulus",)
        )
        center = (
            _as_real(doc["center_modulus"], "'constraint.center_modulus'")
            if "center_modulus" in doc
            else default_modulus
        )
        return AnnulusModulus(
            center_modulus=center,
            eps_lo=_as_real(doc["eps_lo"], "'constraint.eps_lo'"),
            eps_hi=_as_real(doc["eps_hi"], "'constraint.eps_hi'"),
        )
    if kind == "cms":
        _check_keys(doc, "'constraint'", ("kind", "eps", "reference"), ("modulus",))
        modulus = (
            _as_real(doc["modulus"], "'constraint.modulus'")
            if "modulus" in doc
            else default_modulus
        )
        reference = _parse_reference(doc["reference"], array, "'constraint.reference'")
        return ConstantModulusSimilarity(
            modulus=modulus,
            reference=reference,
            eps=_as_real(doc["eps"], "'constraint.eps'"),
        )
    raise ScenarioFormatError(
        f"'constraint.kind' must be 'cm', 'eps_cm' or 'cms', got {kind!r}"
    )


def parse_scenario(doc: dict) -> Scenario:
    """Build a validated Scenario from a parsed JSON document."""
    _check_keys(
        doc,
        "scenario",
        ("array", "target", "noise_power_db", "constraint"),
        ("interferers",),
    )
    array = _parse_array(doc["array"])
    target = _parse_emitter(doc["target"], "'target'")
    raw = doc.get("interferers", [])
    if not isinstance(raw, list):
        raise ScenarioFormatError("'interferers' must be a list")
    interferers = tuple(
        _parse_emitter(entry, f"'interferers[{i}]'") for i, entry in enumerate(raw)
    )
    return Scenario(
        array=array,
        target=target,
        interferers=interferers,
        noise_power_db=_as_real(doc["noise_power_db"], "'noise_power_db'"),
        constraint=_parse_constraint(doc["constraint"], array),
    )


def load_scenario(path: str | Path) -> Scenario:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioFormatError(f"{path} is not valid JSON: {exc}") from exc
    return parse_scenario(doc)


def _degrees_exact(angle_rad: float) -> float | None:
    """A degree double whose radian conversion is bit-exact, if one exists."""
    deg = math.degrees(angle_rad)
    if math.radians(deg) == angle_rad:
        return deg
    for direction in (math.inf, -math.inf):
        candidate = deg
        for _ in range(3):
            candidate = math.nextafter(candidate, direction)
            if math.radians(candidate) == angle_rad:
                return candidate
    return None


def _emitter_to_doc(emitter: Emitter) -> dict:
    doc: dict = {"range_bin": emitter.range_bin}
    deg = _degrees_exact(emitter.angle)
    if deg is not None:
        doc["angle_deg"] = deg
    else:
        doc["angle_rad"] = emitter.angle
    doc["power_db"] = emitter.power_db
    return doc


def _constraint_to_doc(constraint: ConstraintSpec) -> dict:
    if isinstance(constraint, ConstantModulus):
        return {"kind": "cm", "modulus": constraint.modulus}
    if isinstance(constraint, AnnulusModulus):
        return {
            "kind": "eps_cm",
            "center_modulus": constraint.center_modulus,
            "eps_lo": constraint.eps_lo,
            "eps_hi": constraint.eps_hi,
        }
    if isinstance(constraint, ConstantModulusSimilarity):
        return {
            "kind": "cms",
            "modulus": constraint.modulus,
            "eps": constraint.eps,
            "reference": [[z.real, z.imag] for z in constraint.reference],
        }
    raise TypeError(f"unsupported constraint {type(constraint).__name__}")


def scenario_to_doc(scenario: Scenario) -> dict:
    """Canonical JSON document (explicit defaults) for a Scenario."""
    return {
        "array": {
            "n_tx": scenario.array.n_tx,
            "n_rx": scenario.array.n_rx,
            "n_samples": scenario.array.n_samples,
        },
        "target": _emitter_to_doc(scenario.target),
        "interferers": [_emitter_to_doc(e) for e in scenario.interferers],
        "noise_power_db": scenario.noise_power_db,
        "constraint": _constraint_to_doc(scenario.constraint),
    }


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(scenario_to_doc(scenario), fh, indent=2)
        fh.write("\n")


def save_waveform(data: np.ndarray, path: str | Path) -> None:
    """Two-column ASCII (real, imaginary), full double precision."""
    arr = np.asarray(data)
    np.savetxt(path, np.column_stack([arr.real, arr.imag]), fmt="%.18e")


def load_waveform(path: str | Path) -> np.ndarray:
    table = np.loadtxt(path, dtype=float, ndmin=2)
    if table.ndim != 2 or table.shape[1] != 2:
        raise ValueError(f"{path} is not a two-column real/imaginary file")
    return table[:, 0] + 1j * table[:, 1]


def parse_stepsize(text: str) -> StepsizeRule:
    """Parse 'constant:ALPHA' or 'armijo[:TAU,BETA,SIGMA]' into a rule."""
    name, _, params = text.partition(":")
    name = name.strip().lower()
    if name == "constant":
        if not params:
            raise ValueError("constant stepsize needs a value, e.g. 'constant:1e-3'")
        return ConstantStep(alpha=float(params))
    if name == "armijo":
        if not params:
            return ArmijoStep()
        parts = [p.strip() for p in params.split(",")]
        if len(parts) != 3:
            raise ValueError(
                "armijo parameters must be 'armijo:TAU,BETA,SIGMA', got "
                f"{text!r}"
            )
        return ArmijoStep(tau=float(parts[0]), beta=float(parts[1]), sigma=float(parts[2]))
    raise ValueError(f"unknown stepsize rule {text!r} (use 'constant:...' or 'armijo:...')")


def format_stepsize(rule: StepsizeRule) -> str:
    if isinstance(rule, ConstantStep):
        return f"constant:{rule.alpha!r}"
    return f"armijo:{rule.tau!r},{rule.beta!r},{rule.sigma!r}"
