"""YAML scenario documents: parsing against a fixed schema and canonical output."""

from __future__ import annotations

import math
from dataclasses import MISSING, fields
from pathlib import Path

import yaml

from .types import (
    AT_LEAST,
    BATTERY,
    EQUALITY,
    HYDROGEN,
    GeneratorSpec,
    GridCoupling,
    MwenSpec,
    NetworkPrices,
    PolicyParams,
    Profiles,
    PumpSpec,
    Scenario,
    StorageSpec,
    TankSpec,
    TreatmentSpec,
    WastewaterSpec,
    WaterMainCoupling,
)


class ScenarioError(ValueError):
    pass


class ScenarioSyntaxError(ScenarioError):
    pass


class ScenarioSchemaError(ScenarioError):
    pass


NUMBER, COUNT, BOOL, STR, SERIES = "number", "count", "bool", "str", "series"

_SCHEMA: dict[type, dict[str, object]] = {
    Scenario: {
        "name": STR, "horizon_periods": COUNT, "dt_hours": NUMBER, "mwens": [MwenSpec],
        "grid": GridCoupling, "water_main": WaterMainCoupling, "network_prices": NetworkPrices,
        "policies": PolicyParams,
    },
    MwenSpec: {
        "name": STR, "tie_line_power_kw": NUMBER, "tie_line_water_gph": NUMBER, "profiles": Profiles,
        "generators": [GeneratorSpec], "storages": [StorageSpec], "wastewater": WastewaterSpec,
        "treatment": TreatmentSpec, "tanks": [TankSpec],
    },
    GeneratorSpec: {
        "p_min_kw": NUMBER, "p_max_kw": NUMBER, "cost_per_kwh": NUMBER, "no_load_per_h": NUMBER,
        "startup_cost": NUMBER, "initial_on": BOOL,
    },
    StorageSpec: {
        "kind": ("choice", (BATTERY, HYDROGEN)), "rate_limit_kw": NUMBER, "level_max_kwh": NUMBER,
        "eta_charge": NUMBER, "eta_discharge": NUMBER, "level_min_kwh": NUMBER,
        "initial_level_kwh": NUMBER, "water_per_kwh_charged": NUMBER,
    },
    WastewaterSpec: {
        "out_max_gph": NUMBER, "reservoir_cap_gal": NUMBER, "gal_per_kwh": NUMBER, "out_min_gph": NUMBER,
        "no_load_per_h": NUMBER, "recovery_fraction": NUMBER, "initial_reservoir_gal": NUMBER,
        "pump": PumpSpec,
    },
    TreatmentSpec: {
        "out_max_gph": NUMBER, "gal_per_kwh": NUMBER, "out_min_gph": NUMBER, "no_load_per_h": NUMBER,
        "pump": PumpSpec,
    },
    TankSpec: {"rate_limit_gph": NUMBER, "cap_gal": NUMBER, "initial_level_gal": NUMBER, "pump": PumpSpec},
    PumpSpec: {"alpha_kwh_per_gal": NUMBER, "eta": NUMBER},
    Profiles: {"power_load_kw": SERIES, "water_load_gph": SERIES, "solar_kw": SERIES, "wind_kw": SERIES},
    GridCoupling: {"buy_price": SERIES, "tie_limit_kw": NUMBER, "sell_price": SERIES},
    WaterMainCoupling: {"import_price": SERIES, "tie_limit_gph": NUMBER},
    NetworkPrices: {"power": SERIES, "water": SERIES},
    PolicyParams: {
        "final_energy_fraction": NUMBER, "final_water_fraction": NUMBER,
        "final_wastewater_fraction": NUMBER,
        "terminal_sense_storage": ("choice", (EQUALITY, AT_LEAST)),
        "first_period_recovery": ("choice", ("demand", "zero")),
    },
}


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioSchemaError(f"{path}: expected a number, got {type(value).__name__}")
    value = float(value)
    if not math.isfinite(value):
        raise ScenarioSchemaError(f"{path}: value must be finite, got {value}")
    return value


def _convert(kind, value, path, horizon):
    if isinstance(kind, list):
        if not isinstance(value, list):
            raise ScenarioSchemaError(f"{path}: expected a list")
        return tuple(_build(kind[0], item, f"{path}[{i}]", horizon) for i, item in enumerate(value))
    if isinstance(kind, type):
        return _build(kind, value, path, horizon)
    if isinstance(kind, tuple):
        if value not in kind[1]:
            raise ScenarioSchemaError(f"{path}: expected one of {list(kind[1])}, got {value!r}")
        return value
    if kind == NUMBER:
        return _number(value, path)
    if kind == COUNT:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ScenarioSchemaError(f"{path}: expected an integer")
        return value
    if kind == BOOL:
        if not isinstance(value, bool):
            raise ScenarioSchemaError(f"{path}: expected true or false")
        return value
    if kind == STR:
        if not isinstance(value, str):
            raise ScenarioSchemaError(f"{path}: expected a string")
        return value
    if kind == SERIES:
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            # a scalar means a flat series over the horizon
            return (_number(value, path),) * horizon
        if not isinstance(value, list):
            raise ScenarioSchemaError(f"{path}: expected a list of numbers or a single number")
        return tuple(_number(v, f"{path}[{i}]") for i, v in enumerate(value))
    raise AssertionError(kind)


def _build(cls, data, path, horizon):
    if not isinstance(data, dict):
        raise ScenarioSchemaError(f"{path}: expected a mapping")
    schema = _SCHEMA[cls]
    unknown = sorted(set(data) - set(schema))
    if unknown:
        raise ScenarioSchemaError(f"{path}: unknown key(s) {', '.join(map(str, unknown))}")
    kwargs = {}
    for f in fields(cls):
        if f.name in data and data[f.name] is not None:
            kwargs[f.name] = _convert(schema[f.name], data[f.name], f"{path}.{f.name}", horizon)
        elif f.default is MISSING and f.default_factory is MISSING:
            raise ScenarioSchemaError(f"{path}: missing required field '{f.name}'")
    return cls(**kwargs)


def parse_scenario(document: str) -> Scenario:
    """Parse a YAML scenario document, applying defaults for omitted fields."""
    try:
        data = yaml.safe_load(document)
    except yaml.YAMLError as exc:
        raise ScenarioSyntaxError(f"malformed scenario document: {exc}") from None
    if not isinstance(data, dict):
        raise ScenarioSchemaError("scenario: expected a mapping at the top level")
    horizon = data.get("horizon_periods")
    if not isinstance(horizon, int) or isinstance(horizon, bool):
        if "horizon_periods" not in data:
            raise ScenarioSchemaError("scenario: missing required field 'horizon_periods'")
        raise ScenarioSchemaError("scenario.horizon_periods: expected an integer")
    return _build(Scenario, data, "scenario", horizon)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc.strerror or exc}") from None
    return parse_scenario(text)


def _plain(obj):
    cls = type(obj)
    if cls in _SCHEMA:
        out = {}
        for f in fields(cls):
            value = getattr(obj, f.name)
            if value is None:
                continue
            out[f.name] = _plain(value)
        return out
    if isinstance(obj, tuple):
        return [_plain(v) for v in obj]
    if isinstance(obj, float):
        return float(obj)
    return obj


class _Dumper(yaml.SafeDumper):
    pass


def _represent_list(dumper, data):
    flow = all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in data)
    return dumper.represent_sequence("tag:yaml.org,2002:seq", data, flow_style=flow)


_Dumper.add_representer(list, _represent_list)


def serialize_scenario(s: Scenario) -> str:
    """Canonical YAML: schema field order, full series, every default written out."""
    return yaml.dump(_plain(s), Dumper=_Dumper, sort_keys=False, width=100, allow_unicode=False)


def save_scenario(s: Scenario, path) -> None:
    Path(path).write_text(serialize_scenario(s))
