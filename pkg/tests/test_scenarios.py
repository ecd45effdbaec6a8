"""
Tests for the built-in scenarios, their closed-form value functions and
the scenario document loader
"""
import json
import math

import pytest

from sweepctl.modules.a_geometry import Box, HalfSpace
from sweepctl.modules.e_scenarios import (
    DEPARTURE,
    DIAGONAL_LOW,
    SCENARIO_DIR,
    build_from_config,
    build_shape,
    example1_exact_T,
    example2_exact_T,
    example2_T1,
    example2_T2,
    example2_T3,
    example2_T3_derivative,
    in_region_D,
    load_scenario,
    parse_scenario,
    scenario_to_config,
)
from sweepctl.utils.exceptions import ConfigError, DomainError, OutsideGraph

LOG3 = math.log(3.0)
SQRT2 = math.sqrt(2.0)


class TestExample1:
    @pytest.mark.parametrize("t, x, expected", [
        (0.0, -1.0, 1.0 + LOG3),
        (0.0, 0.0, LOG3),
        (1.0, 0.0, LOG3),
        (0.5, -0.5, 0.5 + LOG3),
        (2.0, 1.5, LOG3 - math.log(2.5)),
        (2.0, 2.0, 0.0),
    ])
    def test_exact_value(self, t, x, expected):
        assert example1_exact_T(t, x) == pytest.approx(expected)

    def test_outside_the_graph(self):
        with pytest.raises(OutsideGraph):
            example1_exact_T(0.5, -1.0)
        with pytest.raises(OutsideGraph):
            example1_exact_T(3.5, 2.0)

    def test_bundle_constants(self, ex1):
        assert ex1.constants == {"r": math.inf, "L_C": 1.0, "M": 3.0, "L_G": 1.0, "rho": 4.0}
        assert not ex1.autonomous
        assert ex1.exact_T.name == "example1_exact"
        assert ex1.start == [0.0, -1.0]
        assert ex1.target.distance([2.0]) == 0.0
        assert ex1.target.distance([1.9]) == pytest.approx(0.1)


class TestExample2:
    def test_diagonal_leg(self):
        assert example2_T1(1.0) == pytest.approx(0.0)
        assert example2_T1(DIAGONAL_LOW) == pytest.approx(SQRT2 / 2.0)
        assert example2_T1(0.8) == pytest.approx(0.5 * (1.2 - math.sqrt(0.56)))

    def test_sliding_leg(self):
        assert example2_T2(DIAGONAL_LOW) == pytest.approx(0.0, abs=1e-12)
        assert example2_T2(1.0) == pytest.approx(0.6232, abs=1e-3)

    def test_total_time_from_the_axis(self):
        assert example2_T3(DIAGONAL_LOW) == pytest.approx(2.0 + SQRT2)
        assert example2_T3(1.0) == pytest.approx(3.3303, abs=1e-3)

    def test_derivative(self):
        assert example2_T3_derivative(1.0) == pytest.approx(0.0, abs=1e-12)
        assert example2_T3_derivative(DIAGONAL_LOW) == -0.5
        h = 1e-6
        y0 = 0.8
        numeric = (example2_T3(y0 + h) - example2_T3(y0 - h)) / (2.0 * h)
        assert example2_T3_derivative(y0) == pytest.approx(numeric, rel=1e-5)

    @pytest.mark.parametrize("func", [example2_T1, example2_T2, example2_T3, example2_T3_derivative])
    def test_domain_of_the_axis_functions(self, func):
        with pytest.raises(DomainError):
            func(0.5)
        with pytest.raises(DomainError):
            func(1.2)

    @pytest.mark.parametrize("x, y, expected", [
        (5.0, 0.0, 4.0),
        (0.0, 0.0, 4.0),
        (0.0, 0.5, 3.5),
        (0.3, 3.0, 1.0),
        (DEPARTURE[0], DEPARTURE[1], 2.0 + SQRT2 / 2.0),
    ])
    def test_exact_value_off_the_sliding_region(self, x, y, expected):
        assert example2_exact_T(x, y) == pytest.approx(expected)

    def test_exact_value_on_the_sliding_region(self):
        assert in_region_D(0.0, 1.0)
        assert example2_exact_T(0.0, 1.0) == pytest.approx(3.3303, abs=1e-3)
        # symmetric in x
        assert example2_exact_T(-0.2, 1.0) == pytest.approx(example2_exact_T(0.2, 1.0))

    def test_value_is_continuous_across_the_diagonal(self):
        x = 0.3
        below = example2_exact_T(x, x + DIAGONAL_LOW - 1e-9)
        above = example2_exact_T(x, x + DIAGONAL_LOW + 1e-9)
        assert not in_region_D(x, x + DIAGONAL_LOW - 1e-9)
        assert in_region_D(x, x + DIAGONAL_LOW + 1e-9)
        assert above == pytest.approx(below, abs=1e-6)

    def test_outside_the_holed_box(self):
        with pytest.raises(OutsideGraph):
            example2_exact_T(0.0, 2.0)
        with pytest.raises(OutsideGraph):
            example2_exact_T(6.0, 1.0)

    def test_bundle_constants(self, ex2):
        constants = ex2.constants
        assert constants["r"] == 1.0
        assert constants["L_C"] == 0.0
        assert constants["M"] == pytest.approx(SQRT2)
        assert constants["rho"] == pytest.approx(SQRT2)
        assert ex2.autonomous
        assert ex2.exact_T.autonomous


class TestDocuments:
    def test_build_shape_from_a_dict(self):
        box = build_shape({"kind": "box", "lo": [0.0, 0.0], "hi": [1.0, 2.0]})
        assert isinstance(box, Box)
        half = build_shape({"kind": "halfspace", "normal": [0.0, -1.0], "offset": -4.0})
        assert isinstance(half, HalfSpace)

    @pytest.mark.parametrize("spec", [
        {"kind": "box", "lo": [1.0], "hi": [0.0]},
        {"kind": "sphere", "radius": 1.0},
        {"kind": "box_minus_ball", "lo": [0.0, 0.0], "hi": [1.0, 1.0], "center": [0.0, 0.0], "radius": 0.5},
        {"kind": "interval", "a0": 2.0, "b0": 1.0},
    ])
    def test_invalid_shapes(self, spec):
        with pytest.raises(ConfigError):
            build_shape(spec)

    def test_malformed_json_reports_a_line(self):
        text = '{\n  "name": "broken",\n  "constraint": ,\n}'
        with pytest.raises(ConfigError) as exc:
            parse_scenario(text)
        assert exc.value.line == 3
        assert "line 3" in str(exc.value)

    def test_invalid_field_reports_its_line(self):
        document = json.loads((SCENARIO_DIR / "example2.json").read_text())
        document["constraint"]["radius"] = -1.0
        text = json.dumps(document, indent=2)
        expected = next(i for i, line in enumerate(text.splitlines(), start=1) if '"radius"' in line)
        with pytest.raises(ConfigError) as exc:
            parse_scenario(text, source="holed.json")
        assert exc.value.line == expected
        assert "holed.json" in exc.value.message

    def test_dimension_mismatch(self):
        document = json.loads((SCENARIO_DIR / "example1.json").read_text())
        document["control"] = {"kind": "ball", "radius": 1.0, "dim": 2, "bound": 1.0}
        with pytest.raises(ConfigError):
            build_from_config(parse_scenario(json.dumps(document)))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_scenario(str(tmp_path / "nope.json"))

    def test_load_from_a_path(self, tmp_path):
        document = json.loads((SCENARIO_DIR / "example1.json").read_text())
        document["name"] = "copy"
        document.pop("exact_candidate")
        path = tmp_path / "copy.json"
        path.write_text(json.dumps(document))
        bundle = load_scenario(str(path))
        assert bundle.name == "copy"
        assert bundle.exact_T is None
        assert bundle.features == []
        assert bundle.constants["L_C"] == 1.0

    def test_rho_defaults_to_speed_bounds(self):
        document = json.loads((SCENARIO_DIR / "example1.json").read_text())
        document.pop("rho")
        bundle = build_from_config(parse_scenario(json.dumps(document)))
        assert bundle.rho == pytest.approx(4.0)

    def test_config_copy_is_independent(self, ex1):
        config = scenario_to_config(ex1)
        assert config == ex1.config
        config.name = "changed"
        assert ex1.config.name == "example1"
