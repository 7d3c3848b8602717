"""Scenario parsing, defaults and strict validation."""

import json

import pytest

from magnonmix.errors import ScenarioError
from magnonmix.scenario import load_scenario, scenario_from_dict


def write(tmp_path, doc):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(doc))
    return str(path)


class TestDefaults:
    def test_empty_document_gives_defaults(self, tmp_path):
        sc = load_scenario(write(tmp_path, {}))
        assert (sc.grid.nx, sc.grid.ny) == (256, 64)
        assert sc.grid.dx == 5e-9 and sc.grid.thickness == 15e-9
        assert sc.material.Ms == 1.0e6
        assert sc.material.Aex == 1.5e-11
        assert sc.material.Ku == 5.0e3
        assert sc.material.alpha == 0.02
        assert sc.texture.kind == "uniform"
        assert sc.integrator.n_periods == 20
        assert sc.nv.zfs_hz == 2.870e9
        assert sc.planner.max_order == 6
        assert sc.mode == "analytic"
        assert sc.threads == 0

    def test_default_drive_is_reference_configuration(self, tmp_path):
        # 1.0 mT bias along x, one 800 uT tone at 287 MHz along y
        sc = load_scenario(write(tmp_path, {}))
        assert sc.drive.bias == (1e-3, 0.0, 0.0)
        tone = sc.drive.tones[0]
        assert tone.amplitude == 8e-4
        assert tone.frequency == 287e6
        assert tone.axis == (0.0, 1.0, 0.0)


class TestValidation:
    def test_negative_dx_names_field(self, tmp_path):
        with pytest.raises(ScenarioError) as err:
            load_scenario(write(tmp_path, {"grid": {"dx": -5e-9}}))
        assert any("grid.dx" in p for p in err.value.problems)

    def test_unknown_top_level_key(self, tmp_path):
        with pytest.raises(ScenarioError) as err:
            load_scenario(write(tmp_path, {"gird": {}}))
        assert any("gird" in p and "unknown" in p for p in err.value.problems)

    def test_unknown_nested_key(self, tmp_path):
        with pytest.raises(ScenarioError) as err:
            load_scenario(write(tmp_path, {"material": {"Msat": 8e5}}))
        assert any("material.Msat" in p for p in err.value.problems)

    def test_all_violations_reported_at_once(self, tmp_path):
        doc = {"grid": {"dx": -1.0, "nx": 1},
               "material": {"alpha": 7.0},
               "mode": "magic"}
        with pytest.raises(ScenarioError) as err:
            load_scenario(write(tmp_path, doc))
        text = "\n".join(err.value.problems)
        for needle in ("grid.dx", "grid.nx", "material.alpha", "mode"):
            assert needle in text
        assert len(err.value.problems) >= 4

    def test_parse_error_reports_position(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"grid": {"nx": 128,}}')
        with pytest.raises(ScenarioError) as err:
            load_scenario(str(path))
        assert "line" in err.value.problems[0]

    def test_missing_file(self, tmp_path):
        with pytest.raises(ScenarioError):
            load_scenario(str(tmp_path / "absent.json"))

    def test_sweep_steps_must_be_positive(self, tmp_path):
        doc = {"sweep": {"bias_t": {"start": 0, "stop": 1e-3, "steps": 0}}}
        with pytest.raises(ScenarioError) as err:
            load_scenario(write(tmp_path, doc))
        assert any("sweep.bias_t.steps" in p for p in err.value.problems)

    def test_bad_tone_rejected(self, tmp_path):
        doc = {"drive": {"tones": [{"frequency_hz": -1.0}]}}
        with pytest.raises(ScenarioError) as err:
            load_scenario(write(tmp_path, doc))
        assert any("drive.tones[0].frequency_hz" in p for p in err.value.problems)


class TestReferenceReplica:
    def test_methods_style_file(self, tmp_path):
        doc = {
            "grid": {"nx": 256, "ny": 64, "dx": 5e-9, "dy": 5e-9,
                     "thickness": 15e-9},
            "drive": {"bias_t": [1e-3, 0, 0],
                      "tones": [{"amplitude_t": 8e-4, "frequency_hz": 287e6,
                                 "phase_rad": 0.0, "axis": [0, 1, 0]}]},
            "texture": {"kind": "multi-step", "n_walls": 4},
            "analysis": {"harmonic": 10},
        }
        sc = load_scenario(write(tmp_path, doc))
        assert sc.drive.bias[0] == 1e-3
        assert sc.drive.tones[0].amplitude == 8e-4
        assert sc.drive.tones[0].frequency == 287e6
        assert sc.texture.kind == "multi-step" and sc.texture.n_walls == 4
        assert sc.analysis.harmonic == 10
        # 10th harmonic of 287 MHz sits at the zero-field ESR frequency
        assert 10 * sc.drive.tones[0].frequency == pytest.approx(sc.nv.zfs_hz,
                                                                 rel=1e-9)

    def test_texture_list_strings_and_objects(self, tmp_path):
        doc = {"analysis": {"textures": [
            "uniform", "one-step", "two-step",
            {"kind": "multi-step", "n_walls": 4},
        ]}}
        sc = load_scenario(write(tmp_path, doc))
        kinds = [t.kind for t in sc.analysis.textures]
        assert kinds == ["uniform", "one-step", "two-step", "multi-step"]
        assert sc.analysis.textures[3].n_walls == 4
        assert sc.texture_list() == sc.analysis.textures


class TestRunPlanHelper:
    def test_plan_from_scenario(self):
        sc = scenario_from_dict({})
        plan = sc.run_plan()
        assert plan.duration * 287e6 == pytest.approx(20, rel=1e-12)
        assert plan.settle * 287e6 == pytest.approx(10, rel=1e-12)

    def test_plan_respects_dt_max(self):
        sc = scenario_from_dict({"integrator": {"sample_every": 5}})
        plan = sc.run_plan(dt_max=1e-12)
        assert plan.dt <= 1e-12
