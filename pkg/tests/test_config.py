import math

import pytest
from hypothesis import given, strategies as st

from vvlc.config import (ConfigError, MotionState, ScenarioConfig, emit_scenario, load_scenario,
                         parse_scenario, preset)


def test_preset_table_values(table):
    assert (table.ellipse.a, table.ellipse.b) == (40.0, 19.0)
    assert table.spheres.radius_tx == table.spheres.radius_rx == 4.0
    assert 2 * table.layout.half_separation == pytest.approx(1.2)
    assert table.receiver.fov == pytest.approx(math.radians(80))
    assert table.receiver.area == 1e-4 and table.receiver.refractive_index == 1.5
    assert all(f.count == 100 for f in table.vmf.values())
    assert (table.reflectivity_vehicles, table.reflectivity_roadside) == (0.8, 0.4)
    assert table.motion.v_tx * 3.6 == pytest.approx(21.6) and table.motion.v_rx * 3.6 == pytest.approx(14.4)
    assert table.motion.stop_distance == 6.0 and table.motion.d0 == 70.0
    assert table.lamp.luminous_intensity_peak == 8830.0


def test_mirrored_populations(table):
    for sub in ("SB1", "SB2", "SB3"):
        assert table.vmf[(sub, "right")].alpha0 == -table.vmf[(sub, "left")].alpha0


def test_empty_file_equals_preset(table):
    assert parse_scenario("") == table
    assert parse_scenario("# only a comment\n") == table


def test_round_trip(table, tmp_path):
    path = tmp_path / "s.toml"
    path.write_text(emit_scenario(table))
    assert load_scenario(path) == table
    odd = table.with_vmf("SB2", alpha0=math.radians(33.3), concentration=7.5)
    path.write_text(emit_scenario(odd))
    assert load_scenario(path) == odd


@given(a=st.floats(10, 100), k=st.floats(0, 100), deg=st.floats(-179, 179))
def test_round_trip_property(a, k, deg):
    text = f"ellipse.a_m = {a!r}\nellipse.b_m = {a / 2!r}\nvmf.sb1.left.k = {k!r}\nvmf.sb1.left.alpha0_deg = {deg!r}\n"
    scn = parse_scenario(text)
    assert parse_scenario(emit_scenario(scn)) == scn


def test_axes_violation():
    with pytest.raises(ConfigError, match="a > b violated"):
        parse_scenario("ellipse.a_m = 19\nellipse.b_m = 40\n")


def test_unknown_key_located():
    with pytest.raises(ConfigError) as exc:
        parse_scenario("lamp.mode_number = 2\n\n  lamp.colour = 3\n")
    assert exc.value.line == 3 and exc.value.col == 3


def test_parse_error_located():
    with pytest.raises(ConfigError) as exc:
        parse_scenario("ellipse.a_m = = 4\n")
    assert exc.value.line == 1


def test_wrong_type():
    with pytest.raises(ConfigError, match="expected a number"):
        parse_scenario('ellipse.a_m = "forty"\n')


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_scenario(tmp_path / "nope.toml")


def test_photometric_rederivation():
    scn = parse_scenario("lamp.luminous_intensity_cd = 4415\n")
    assert scn.lamp.tx_power == pytest.approx(preset().lamp.tx_power / 2)
    assert parse_scenario("lamp.tx_power_w = 2.5\n").lamp.tx_power == 2.5


def test_unknown_preset():
    with pytest.raises(ConfigError):
        preset("nope")


def test_motion_state():
    m = MotionState()
    assert m.closing_speed == pytest.approx(2.0)
    assert m.stop_time == pytest.approx(32.0)
    assert MotionState(v_tx=1, v_rx=2).stop_time == math.inf
    with pytest.raises(ValueError):
        MotionState(d0=5)


def test_scenario_validation(table):
    import dataclasses
    with pytest.raises(ValueError):
        dataclasses.replace(table, reflectivity_vehicles=1.5)
    with pytest.raises(ValueError):
        dataclasses.replace(table, backend="exact")
    with pytest.raises(ValueError):
        ScenarioConfig(vmf={})


def test_with_vmf(table):
    s = table.with_vmf("SB1", alpha0=math.radians(30))
    assert s.vmf[("SB1", "left")].alpha0 == pytest.approx(math.radians(30))
    assert s.vmf[("SB1", "right")].alpha0 == pytest.approx(-math.radians(30))
    assert s.vmf[("SB2", "left")] == table.vmf[("SB2", "left")]
    s = table.with_vmf(concentration=3.0)
    assert all(f.concentration == 3.0 for f in s.vmf.values())
