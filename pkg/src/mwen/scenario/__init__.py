"""Scenario data types, YAML documents, validation and the bundled case study."""

from .builtin import builtin_case_study, reduced_case_study, subset_scenario
from .io import (
    ScenarioError,
    ScenarioSchemaError,
    ScenarioSyntaxError,
    load_scenario,
    parse_scenario,
    save_scenario,
    serialize_scenario,
)
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
from .validation import ValidationReport, Violation, validate_scenario

__all__ = [
    "AT_LEAST", "BATTERY", "EQUALITY", "HYDROGEN",
    "GeneratorSpec", "GridCoupling", "MwenSpec", "NetworkPrices", "PolicyParams", "Profiles",
    "PumpSpec", "Scenario", "StorageSpec", "TankSpec", "TreatmentSpec", "WastewaterSpec",
    "WaterMainCoupling",
    "ScenarioError", "ScenarioSchemaError", "ScenarioSyntaxError",
    "load_scenario", "parse_scenario", "save_scenario", "serialize_scenario",
    "ValidationReport", "Violation", "validate_scenario",
    "builtin_case_study", "reduced_case_study", "subset_scenario",
]
