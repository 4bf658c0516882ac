import math
from dataclasses import replace
from importlib import resources

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mwen.scenario import (
    BATTERY,
    HYDROGEN,
    NetworkPrices,
    ScenarioSchemaError,
    ScenarioSyntaxError,
    builtin_case_study,
    load_scenario,
    parse_scenario,
    serialize_scenario,
    validate_scenario,
)

MINIMAL = """
horizon_periods: 2
dt_hours: 1.0
mwens:
  - name: A
    tie_line_power_kw: 100
    tie_line_water_gph: 50
    profiles: {power_load_kw: [10, 20], water_load_gph: [5, 5]}
    generators:
      - {p_min_kw: 0, p_max_kw: 50, cost_per_kwh: 0.2}
grid: {buy_price: 0.1, tie_limit_kw: 100}
water_main: {import_price: 0.006, tie_limit_gph: 50}
"""


def bundled_text():
    return resources.files("mwen").joinpath("scenarios/paper_4mwen.yaml").read_text()


def test_minimal_document_gets_defaults():
    s = parse_scenario(MINIMAL)
    pol = s.policies
    assert (pol.final_energy_fraction, pol.final_water_fraction, pol.final_wastewater_fraction) == (0.5, 0.5, 0.5)
    assert pol.terminal_sense_storage == "equality"
    assert s.grid.buy_price == (0.1, 0.1)
    assert s.grid.sell_price == pytest.approx((0.09, 0.09))
    assert s.network_prices.power == pytest.approx((0.095, 0.095))
    assert s.network_prices.water == pytest.approx((0.003, 0.003))
    assert s.mwens[0].generators[0].initial_on is False
    assert s.mwens[0].profiles.solar_kw == (0.0, 0.0)


def test_missing_dt_hours_names_the_field():
    text = MINIMAL.replace("dt_hours: 1.0\n", "")
    with pytest.raises(ScenarioSchemaError, match="dt_hours"):
        parse_scenario(text)


def test_unknown_key_rejected():
    with pytest.raises(ScenarioSchemaError, match="colour"):
        parse_scenario(MINIMAL + "colour: blue\n")


def test_malformed_document_is_a_syntax_error():
    with pytest.raises(ScenarioSyntaxError):
        parse_scenario("horizon_periods: [1, 2\n")


def test_wrong_type_is_a_schema_error():
    with pytest.raises(ScenarioSchemaError, match="horizon_periods"):
        parse_scenario(MINIMAL.replace("horizon_periods: 2", "horizon_periods: two"))


@pytest.mark.parametrize("bad", [".nan", ".inf", "-.inf"])
def test_non_finite_numbers_rejected_when_parsing(bad):
    with pytest.raises(ScenarioSchemaError, match="finite"):
        parse_scenario(MINIMAL.replace("cost_per_kwh: 0.2", f"cost_per_kwh: {bad}"))


@pytest.mark.parametrize("value", [math.nan, math.inf, -math.inf])
def test_non_finite_numbers_rejected_when_validating(value):
    s = builtin_case_study()
    mw = s.mwens[0]
    gen = replace(mw.generators[0], cost_per_kwh=value)
    s = replace(s, mwens=(replace(mw, generators=(gen,)), *s.mwens[1:]))
    report = validate_scenario(s)
    assert any("cost_per_kwh" in v.path and "finite" in v.message for v in report)


def test_bundled_file_tie_lines():
    s = parse_scenario(bundled_text())
    assert s.mwens[0].tie_line_power_kw == 1400
    assert s.mwens[0].tie_line_water_gph == 980


def test_bundled_file_matches_builtin():
    assert bundled_text() == serialize_scenario(builtin_case_study())


def test_builtin_case_study_parameters():
    s = builtin_case_study()
    assert len(s.mwens) == 4 and s.horizon_periods == 24 and s.dt_hours == 1.0
    assert s.mwens[1].treatment.gal_per_kwh == 4400
    assert s.grid.tie_limit_kw == 5600
    assert s.water_main.tie_limit_gph == 3920
    assert s.mwens[0].storages[0].eta_discharge == 0.60
    assert [m.storages[0].kind for m in s.mwens] == [HYDROGEN, BATTERY, HYDROGEN, BATTERY]
    assert [(m.storages[0].eta_charge, m.storages[0].eta_discharge) for m in s.mwens] == [
        (0.8, 0.6), (0.95, 0.98), (0.8, 0.6), (0.95, 0.98)]
    assert s.mwens[3].generators == () and s.mwens[3].treatment is None
    assert [m.generators[0].p_min_kw for m in s.mwens[:3]] == [1450, 2390, 900]
    assert [m.wastewater.reservoir_cap_gal for m in s.mwens] == [12000, 18600, 12000, 18600]
    assert all(m.wastewater.recovery_fraction == 0.5 for m in s.mwens)
    assert set(s.water_main.import_price) == {0.006}


def test_builtin_profiles_follow_their_shapes():
    s = builtin_case_study()
    load = s.mwens[0].profiles.power_load_kw
    assert max(range(24), key=load.__getitem__) == 18
    solar = s.mwens[1].profiles.solar_kw
    assert all(solar[t] == 0 for t in range(24) if t < 8 or t > 18)
    assert all(solar[t] > 0 for t in range(8, 19))


def test_bundled_scenario_is_valid():
    assert validate_scenario(builtin_case_study()).ok


def test_eta_charge_out_of_range_gives_one_violation():
    s = builtin_case_study()
    mw = s.mwens[0]
    st_ = replace(mw.storages[0], eta_charge=1.2)
    s = replace(s, mwens=(replace(mw, storages=(st_,)), *s.mwens[1:]))
    report = validate_scenario(s)
    assert len(report) == 1
    (v,) = report
    assert "storages[0]" in v.path and "eta_charge" in v.path
    assert "(0, 1]" in v.message


def test_network_price_above_buy_price_cites_invariant():
    s = builtin_case_study()
    power = list(s.network_prices.power)
    power[3] = s.grid.buy_price[3] + 0.01
    s = replace(s, network_prices=NetworkPrices(power, s.network_prices.water))
    report = validate_scenario(s)
    assert len(report) == 1
    (v,) = report
    assert v.path == "network_prices.power[3]" and "NetworkPrices invariant" in v.message


def test_profile_length_mismatch():
    s = builtin_case_study()
    s = replace(s, horizon_periods=23)
    report = validate_scenario(s)
    assert any("does not match horizon_periods" in v.message for v in report)


def test_sell_above_buy_flagged():
    text = MINIMAL.replace("grid: {buy_price: 0.1,", "grid: {buy_price: 0.1, sell_price: 0.2,")
    report = validate_scenario(parse_scenario(text))
    assert any(v.path.startswith("grid.sell_price") for v in report)


def test_battery_with_water_coefficient_flagged():
    s = builtin_case_study()
    mw = s.mwens[1]
    st_ = replace(mw.storages[0], water_per_kwh_charged=0.1)
    s = replace(s, mwens=(s.mwens[0], replace(mw, storages=(st_,)), *s.mwens[2:]))
    assert any("battery" in v.message for v in validate_scenario(s))


def test_load_scenario_missing_file(tmp_path):
    from mwen.scenario import ScenarioError

    with pytest.raises(ScenarioError, match="nope.yaml"):
        load_scenario(tmp_path / "nope.yaml")


finite = st.floats(min_value=0.0, max_value=1e6, allow_nan=False, allow_infinity=False)
fraction = st.floats(min_value=0.0, max_value=1.0)


@st.composite
def scenarios(draw):
    T = draw(st.integers(1, 5))
    series = st.lists(finite, min_size=T, max_size=T)
    s = builtin_case_study()
    mw = s.mwens[0]
    from mwen.scenario import GridCoupling, Profiles, PolicyParams, WaterMainCoupling

    mwens = []
    for i in range(draw(st.integers(1, 3))):
        prof = Profiles(draw(series), draw(series), draw(series), draw(series))
        gen = replace(mw.generators[0], cost_per_kwh=draw(finite), initial_on=draw(st.booleans()))
        st_ = replace(mw.storages[0], eta_charge=draw(st.floats(0.01, 1.0)), initial_level_kwh=draw(st.floats(0, 9960)))
        mwens.append(replace(mw, name=f"M{i}", profiles=prof, generators=(gen,) * draw(st.integers(0, 2)),
                             storages=(st_,), treatment=draw(st.sampled_from([None, mw.treatment]))))
    buy = draw(series)
    grid = GridCoupling(buy, draw(finite), [b * draw(fraction) for b in buy])
    main = WaterMainCoupling(draw(series), draw(finite))
    pol = PolicyParams(draw(fraction), draw(fraction), draw(fraction),
                       draw(st.sampled_from(["equality", "at-least"])), draw(st.sampled_from(["demand", "zero"])))
    return replace(s, horizon_periods=T, mwens=tuple(mwens), grid=grid, water_main=main,
                   network_prices=NetworkPrices.default_for(grid, main), policies=pol, name=draw(st.text(min_size=1, max_size=8)))


@settings(max_examples=60, deadline=None)
@given(scenarios())
def test_parse_serialize_round_trip(s):
    text = serialize_scenario(s)
    back = parse_scenario(text)
    assert back == s
    assert serialize_scenario(back) == text
