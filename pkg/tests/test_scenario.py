import json

import numpy as np
import pytest

from app.core.exceptions import ScenarioError
from app.models.scenario import CHECK_REPORTS, Scenario
from app.models.simulation import Variant
from app.services.observables import norm
from app.services.scenario import (
    build_config,
    build_grid,
    build_initial_state,
    build_operator,
    build_potential,
    bundled_scenario_path,
    list_scenarios,
    parse_scenario,
    parse_scenario_text,
)

BUNDLED = [path.stem for path in list_scenarios()]


def minimal(**overrides) -> dict:
    raw = {
        "name": "tiny",
        "grid": {"n": 64, "length": 10.0},
        "time": {"dt": 1e-4, "steps": 20, "sample_every": 5},
        "initial_state": {"family": "gaussian_packet", "width": 1.0},
    }
    raw.update(overrides)
    return raw


def dumps(raw: dict) -> str:
    return json.dumps(raw, indent=2)


def test_minimal_scenario_defaults():
    scenario = parse_scenario_text(dumps(minimal()))
    assert scenario.variant == Variant.LCWE
    assert scenario.hbar == 1.0 and scenario.mass == 1.0
    assert scenario.checks == []
    assert scenario.check_operator == "position"
    assert not scenario.potential.has_vector_potential


def test_build_pieces():
    raw = minimal(
        variant="RCWE",
        mass=2.0,
        safety_factor=0.5,
        potential={
            "v0_re": {"family": "harmonic", "omega": 1.0},
            "v0_im": {"family": "gaussian", "height": -0.5, "center": 1.0, "width": 0.5},
            "alpha": [0.1] * 64,
        },
        initial_state={"family": "gaussian_packet", "width": 1.0, "k0": 1.0, "quaternion_mix": [0.6, 0.0, 0.8, 0.0]},
    )
    scenario = parse_scenario_text(dumps(raw))
    grid = build_grid(scenario)
    cfg = build_config(scenario)
    pot = build_potential(scenario, grid)
    psi0 = build_initial_state(scenario, grid)

    assert cfg.variant == Variant.RCWE
    assert cfg.safety_factor == 0.5 and cfg.total_time == pytest.approx(2e-3)
    np.testing.assert_allclose(pot.V0.real, grid.x ** 2)
    np.testing.assert_allclose(pot.V0.imag, -0.5 * np.exp(-((grid.x - 1.0) ** 2) / 0.5))
    np.testing.assert_allclose(pot.alpha, 0.1)
    assert norm(psi0) == pytest.approx(1.0)
    np.testing.assert_allclose(psi0.values[:, 2] / psi0.values[:, 0], 0.8 / 0.6)
    assert build_operator(scenario, grid) is not None


def test_samples_initial_state():
    values = [[1.0, 0.0, 0.0, 0.0]] * 64
    scenario = parse_scenario_text(dumps(minimal(initial_state={"family": "samples", "values": values})))
    psi0 = build_initial_state(scenario, build_grid(scenario))
    np.testing.assert_array_equal(psi0.values, np.asarray(values))


def test_plane_wave_state_has_unit_norm():
    raw = minimal(initial_state={"family": "plane_wave", "k_index": 3, "quaternion_mix": [0.0, 0.0, 0.6, 0.8]})
    scenario = parse_scenario_text(dumps(raw))
    assert norm(build_initial_state(scenario, build_grid(scenario))) == pytest.approx(1.0)
    assert not scenario.has_complex_initial_state


def test_vector_potential_rejects_ehrenfest_momentum():
    raw = minimal(potential={"alpha": {"family": "constant", "value": 0.3}}, checks=["ehrenfest_momentum"])
    with pytest.raises(ScenarioError) as info:
        parse_scenario_text(dumps(raw))
    assert "ehrenfest_momentum needs Q = 0" in str(info.value)
    assert info.value.line == 22


def test_unnormalized_mix_is_rejected():
    raw = minimal(initial_state={"family": "gaussian_packet", "width": 1.0, "quaternion_mix": [1, 0, 1, 0]})
    with pytest.raises(ScenarioError) as info:
        parse_scenario_text(dumps(raw))
    assert "quaternion_mix" in str(info.value)
    assert info.value.line is not None


def test_malformed_json_reports_line():
    text = '{\n  "name": "broken",\n  "grid": {"n": 64,, "length": 1.0}\n}\n'
    with pytest.raises(ScenarioError) as info:
        parse_scenario_text(text, source="broken.json")
    assert info.value.line == 3
    assert str(info.value).startswith("line 3: broken.json: malformed JSON")


def test_unknown_family_points_at_its_line():
    raw = minimal(potential={"v0_re": {"family": "square_well", "depth": 1.0}})
    text = dumps(raw)
    with pytest.raises(ScenarioError) as info:
        parse_scenario_text(text)
    lines = text.splitlines()
    assert "v0_re" in lines[info.value.line - 1] or "family" in lines[info.value.line - 1]


@pytest.mark.parametrize(
    "overrides, fragment",
    [
        ({"grid": {"n": 4, "length": 1.0}}, "grid.n"),
        ({"potential": {"v0_re": [0.0] * 10}}, "potential.v0_re"),
        ({"checks": ["continuity"], "time": {"dt": 1e-4, "steps": 5, "sample_every": 5}}, "time.sample_every"),
        ({"tolerances": {"made_up": 1.0}}, "tolerances"),
        ({"tolerances": {"continuity": -1.0}}, "tolerances"),
        ({"initial_state": {"family": "plane_wave", "k_index": 40}}, "initial_state.k_index"),
        ({"unexpected": 1}, "unexpected"),
        (
            {
                "checks": ["oracle_compare"],
                "initial_state": {"family": "gaussian_packet", "width": 1.0, "quaternion_mix": [0.0, 0.0, 1.0, 0.0]},
            },
            "oracle_compare needs a complex initial state",
        ),
        ({"checks": ["oracle_compare"], "potential": {"v1_re": {"family": "constant", "value": 0.1}}}, "V1 = 0"),
        ({"check_operator": "spin"}, "check_operator"),
        ({"outputs": {"observables": ["energy"]}}, "observables"),
    ],
)
def test_invalid_scenarios(overrides, fragment):
    with pytest.raises(ScenarioError) as info:
        parse_scenario_text(dumps(minimal(**overrides)))
    assert fragment in str(info.value)


def test_tolerance_overrides():
    scenario = parse_scenario_text(dumps(minimal(tolerances={"global_balance": 1e-5})))
    assert scenario.tolerance_for("global_balance") == 1e-5
    assert scenario.tolerance_for("continuity") is None


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_scenarios_parse(name):
    scenario = parse_scenario(bundled_scenario_path(name))
    assert scenario.name == name
    assert scenario.checks
    assert scenario.description
    for check in scenario.checks:
        assert check in CHECK_REPORTS


def test_bundled_scenarios_cover_both_variants():
    variants = {parse_scenario(bundled_scenario_path(name)).variant for name in BUNDLED}
    assert variants == {Variant.LCWE, Variant.RCWE}
    assert len(BUNDLED) >= 8


def test_unknown_bundled_scenario():
    with pytest.raises(ScenarioError) as info:
        bundled_scenario_path("nope")
    assert "real_v_conservation" in str(info.value)


def test_missing_scenario_directory(tmp_path):
    with pytest.raises(FileNotFoundError):
        list_scenarios(tmp_path / "absent")


def test_scenario_model_is_frozen():
    scenario = Scenario.model_validate(minimal())
    with pytest.raises(ValueError):
        scenario.name = "other"
