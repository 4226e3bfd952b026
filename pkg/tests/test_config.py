import json
import math
from importlib import resources

import numpy as np
import pytest

import radarrgd as rr
from conftest import make_desk_scenario, random_waveform


def minimal_doc():
    return {
        "array": {"n_tx": 2, "n_rx": 3, "n_samples": 4},
        "target": {"range_bin": 0, "angle_deg": 15.0, "power_db": 30.0},
        "noise_power_db": 0.0,
        "constraint": {"kind": "cm"},
    }


def test_parse_minimal_scenario_fills_defaults():
    sc = rr.parse_scenario(minimal_doc())
    assert sc.array == rr.ArrayConfig(n_tx=2, n_rx=3, n_samples=4)
    assert sc.interferers == ()
    assert sc.constraint == rr.ConstantModulus(1.0 / math.sqrt(8))


def test_unknown_key_is_named():
    doc = minimal_doc()
    doc["surprise"] = 1
    with pytest.raises(rr.ScenarioFormatError, match="'surprise'"):
        rr.parse_scenario(doc)


def test_missing_key_is_named():
    doc = minimal_doc()
    del doc["target"]
    with pytest.raises(rr.ScenarioFormatError, match="'target'"):
        rr.parse_scenario(doc)


def test_nested_unknown_key_is_named():
    doc = minimal_doc()
    doc["array"]["n_pol"] = 2
    with pytest.raises(rr.ScenarioFormatError, match="'n_pol'"):
        rr.parse_scenario(doc)


def test_emitter_needs_exactly_one_angle_key():
    doc = minimal_doc()
    doc["target"] = {"range_bin": 0, "power_db": 30.0}
    with pytest.raises(rr.ScenarioFormatError, match="angle"):
        rr.parse_scenario(doc)
    doc["target"] = {
        "range_bin": 0,
        "angle_deg": 15.0,
        "angle_rad": 0.2,
        "power_db": 30.0,
    }
    with pytest.raises(rr.ScenarioFormatError, match="angle"):
        rr.parse_scenario(doc)


def test_angle_rad_key_is_taken_verbatim():
    doc = minimal_doc()
    angle = math.pi / 7.0
    doc["target"] = {"range_bin": 0, "angle_rad": angle, "power_db": 30.0}
    assert rr.parse_scenario(doc).target.angle == angle


def test_booleans_are_not_numbers():
    doc = minimal_doc()
    doc["noise_power_db"] = True
    with pytest.raises(rr.ScenarioFormatError, match="number"):
        rr.parse_scenario(doc)
    doc = minimal_doc()
    doc["array"]["n_tx"] = True
    with pytest.raises(rr.ScenarioFormatError, match="integer"):
        rr.parse_scenario(doc)


def test_constraint_kind_checked():
    doc = minimal_doc()
    doc["constraint"] = {"kind": "unimodular"}
    with pytest.raises(rr.ScenarioFormatError, match="kind"):
        rr.parse_scenario(doc)
    doc["constraint"] = {"kind": "eps_cm"}
    with pytest.raises(rr.ScenarioFormatError, match="eps_lo"):
        rr.parse_scenario(doc)


def test_cms_lfm_reference_shortcut():
    doc = minimal_doc()
    doc["constraint"] = {"kind": "cms", "eps": 0.1, "reference": "lfm"}
    sc = rr.parse_scenario(doc)
    np.testing.assert_array_equal(sc.constraint.reference, rr.lfm_init(sc.array).data)


def test_cms_reference_pair_validation():
    doc = minimal_doc()
    doc["constraint"] = {"kind": "cms", "eps": 0.1, "reference": [[1.0, 0.0, 0.0]]}
    with pytest.raises(rr.ScenarioFormatError, match="pair"):
        rr.parse_scenario(doc)


@pytest.mark.parametrize("kind", ["cm", "eps_cm", "cms"])
def test_doc_round_trip_identity(kind):
    sc = make_desk_scenario(kind, n_rx=3, n_tx=2, n=4)
    again = rr.parse_scenario(rr.scenario_to_doc(sc))
    assert again == sc


def test_file_round_trip_through_json(tmp_path):
    sc = make_desk_scenario("cms", n_rx=2, n_tx=2, n=3)
    path = tmp_path / "scene.json"
    rr.save_scenario(sc, path)
    assert rr.load_scenario(path) == sc


def test_awkward_radian_angle_survives_round_trip(tmp_path):
    array = rr.ArrayConfig(n_tx=2, n_rx=2, n_samples=2)
    target = rr.Emitter(0, math.pi / 7.0, 30.0)
    sc = rr.Scenario(array, target, (), 0.0, rr.ConstantModulus(0.5))
    path = tmp_path / "scene.json"
    rr.save_scenario(sc, path)
    again = rr.load_scenario(path)
    assert again.target.angle == target.angle


def test_invalid_json_mentions_path(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(rr.ScenarioFormatError, match="broken.json"):
        rr.load_scenario(path)


def test_bundled_scenarios_parse():
    base = resources.files("radarrgd") / "scenarios"
    cm = rr.parse_scenario(json.loads((base / "cm_10x10x8.json").read_text()))
    assert cm == make_desk_scenario("cm")
    cms = rr.parse_scenario(json.loads((base / "cms_10x10x8.json").read_text()))
    assert cms.constraint.eps == 1.0 / math.sqrt(80.0)
    eps_cm = rr.parse_scenario(json.loads((base / "eps_cm_10x10x8.json").read_text()))
    assert isinstance(eps_cm.constraint, rr.AnnulusModulus)


def test_waveform_file_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    data = random_waveform(rng, 24)
    path = tmp_path / "wave.txt"
    rr.save_waveform(data, path)
    np.testing.assert_array_equal(rr.load_waveform(path), data)


def test_waveform_file_single_entry(tmp_path):
    path = tmp_path / "wave.txt"
    rr.save_waveform(np.array([0.25 - 0.75j]), path)
    np.testing.assert_array_equal(rr.load_waveform(path), [0.25 - 0.75j])


def test_waveform_file_rejects_wrong_column_count(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("1.0 2.0 3.0\n4.0 5.0 6.0\n")
    with pytest.raises(ValueError, match="two-column"):
        rr.load_waveform(path)


def test_parse_stepsize_variants():
    assert rr.parse_stepsize("constant:0.001") == rr.ConstantStep(0.001)
    assert rr.parse_stepsize("armijo") == rr.ArmijoStep()
    assert rr.parse_stepsize("armijo:0.5,0.9,0.75") == rr.ArmijoStep(
        tau=0.5, beta=0.9, sigma=0.75
    )
    assert rr.parse_stepsize("Constant:2e-4") == rr.ConstantStep(2e-4)


def test_parse_stepsize_errors():
    with pytest.raises(ValueError):
        rr.parse_stepsize("constant")
    with pytest.raises(ValueError):
        rr.parse_stepsize("armijo:1,2")
    with pytest.raises(ValueError):
        rr.parse_stepsize("newton:0.1")


@pytest.mark.parametrize(
    "rule",
    [rr.ConstantStep(1e-3), rr.ArmijoStep(), rr.ArmijoStep(tau=0.7, beta=0.5, sigma=0.25)],
)
def test_format_stepsize_round_trip(rule):
    assert rr.parse_stepsize(rr.format_stepsize(rule)) == rule
