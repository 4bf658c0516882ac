"""Scenario data: every model input that is not a decision variable.

All types are frozen. Series are stored as tuples of floats. Fields whose
default depends on another field (initial levels, derived prices) accept
``None`` and are resolved in ``__post_init__``, so a constructed object is
always concrete.
"""

from __future__ import annotations

from dataclasses import dataclass, field

BATTERY = "battery"
HYDROGEN = "hydrogen"
EQUALITY = "equality"
AT_LEAST = "at-least"

DEFAULT_PUMP_ALPHA = 0.002  # kWh/gal
DEFAULT_PUMP_ETA = 0.8
DEFAULT_HYDROGEN_WATER = 0.05  # gal per kWh charged
DEFAULT_SELL_RATIO = 0.9
DEFAULT_NETWORK_WATER_RATIO = 0.5


def _series(values) -> tuple[float, ...]:
    return tuple(float(v) for v in values)


def _set(obj, name, value):
    object.__setattr__(obj, name, value)


@dataclass(frozen=True)
class PumpSpec:
    alpha_kwh_per_gal: float = DEFAULT_PUMP_ALPHA
    eta: float = DEFAULT_PUMP_ETA


@dataclass(frozen=True)
class GeneratorSpec:
    p_min_kw: float
    p_max_kw: float
    cost_per_kwh: float
    no_load_per_h: float = 0.0
    startup_cost: float = 0.0
    initial_on: bool = False


@dataclass(frozen=True)
class StorageSpec:
    kind: str
    rate_limit_kw: float
    level_max_kwh: float
    eta_charge: float
    eta_discharge: float
    level_min_kwh: float = 0.0
    initial_level_kwh: float | None = None
    water_per_kwh_charged: float | None = None

    def __post_init__(self):
        if self.initial_level_kwh is None:
            _set(self, "initial_level_kwh", 0.5 * self.level_max_kwh)
        if self.water_per_kwh_charged is None:
            _set(self, "water_per_kwh_charged", DEFAULT_HYDROGEN_WATER if self.kind == HYDROGEN else 0.0)


@dataclass(frozen=True)
class WastewaterSpec:
    out_max_gph: float
    reservoir_cap_gal: float
    gal_per_kwh: float
    out_min_gph: float = 0.0
    no_load_per_h: float = 0.0
    recovery_fraction: float = 0.5
    initial_reservoir_gal: float | None = None
    pump: PumpSpec = field(default_factory=PumpSpec)

    def __post_init__(self):
        if self.initial_reservoir_gal is None:
            _set(self, "initial_reservoir_gal", 0.25 * self.reservoir_cap_gal)


@dataclass(frozen=True)
class TreatmentSpec:
    out_max_gph: float
    gal_per_kwh: float
    out_min_gph: float = 0.0
    no_load_per_h: float = 0.0
    pump: PumpSpec = field(default_factory=PumpSpec)


@dataclass(frozen=True)
class TankSpec:
    rate_limit_gph: float
    cap_gal: float
    initial_level_gal: float | None = None
    pump: PumpSpec = field(default_factory=PumpSpec)

    def __post_init__(self):
        if self.initial_level_gal is None:
            _set(self, "initial_level_gal", 0.5 * self.cap_gal)


@dataclass(frozen=True)
class Profiles:
    power_load_kw: tuple[float, ...]
    water_load_gph: tuple[float, ...]
    solar_kw: tuple[float, ...] | None = None
    wind_kw: tuple[float, ...] | None = None

    def __post_init__(self):
        _set(self, "power_load_kw", _series(self.power_load_kw))
        _set(self, "water_load_gph", _series(self.water_load_gph))
        zeros = (0.0,) * len(self.power_load_kw)
        _set(self, "solar_kw", zeros if self.solar_kw is None else _series(self.solar_kw))
        _set(self, "wind_kw", zeros if self.wind_kw is None else _series(self.wind_kw))


@dataclass(frozen=True)
class MwenSpec:
    name: str
    tie_line_power_kw: float
    tie_line_water_gph: float
    profiles: Profiles
    generators: tuple[GeneratorSpec, ...] = ()
    storages: tuple[StorageSpec, ...] = ()
    wastewater: WastewaterSpec | None = None
    treatment: TreatmentSpec | None = None
    tanks: tuple[TankSpec, ...] = ()

    def __post_init__(self):
        for name in ("generators", "storages", "tanks"):
            _set(self, name, tuple(getattr(self, name)))


@dataclass(frozen=True)
class GridCoupling:
    buy_price: tuple[float, ...]
    tie_limit_kw: float
    sell_price: tuple[float, ...] | None = None

    def __post_init__(self):
        _set(self, "buy_price", _series(self.buy_price))
        if self.sell_price is None:
            _set(self, "sell_price", tuple(DEFAULT_SELL_RATIO * p for p in self.buy_price))
        else:
            _set(self, "sell_price", _series(self.sell_price))


@dataclass(frozen=True)
class WaterMainCoupling:
    import_price: tuple[float, ...]
    tie_limit_gph: float

    def __post_init__(self):
        _set(self, "import_price", _series(self.import_price))


@dataclass(frozen=True)
class NetworkPrices:
    power: tuple[float, ...]
    water: tuple[float, ...]

    def __post_init__(self):
        _set(self, "power", _series(self.power))
        _set(self, "water", _series(self.water))

    @classmethod
    def default_for(cls, grid: GridCoupling, main: WaterMainCoupling) -> "NetworkPrices":
        power = [0.5 * (b + s) for b, s in zip(grid.buy_price, grid.sell_price)]
        water = [DEFAULT_NETWORK_WATER_RATIO * p for p in main.import_price]
        return cls(power, water)


@dataclass(frozen=True)
class PolicyParams:
    final_energy_fraction: float = 0.5
    final_water_fraction: float = 0.5
    final_wastewater_fraction: float = 0.5
    terminal_sense_storage: str = EQUALITY
    first_period_recovery: str = "demand"  # "demand": use period-1 demand; "zero": no inflow


@dataclass(frozen=True)
class Scenario:
    horizon_periods: int
    dt_hours: float
    mwens: tuple[MwenSpec, ...]
    grid: GridCoupling
    water_main: WaterMainCoupling
    network_prices: NetworkPrices | None = None
    policies: PolicyParams = field(default_factory=PolicyParams)
    name: str = "scenario"

    def __post_init__(self):
        _set(self, "mwens", tuple(self.mwens))
        if self.network_prices is None:
            _set(self, "network_prices", NetworkPrices.default_for(self.grid, self.water_main))

    @property
    def periods(self) -> range:
        return range(self.horizon_periods)

    def mwen_index(self, selector) -> int:
        """Resolve a MWEN by position or by name."""
        if isinstance(selector, int):
            if not 0 <= selector < len(self.mwens):
                raise KeyError(f"no MWEN at position {selector}")
            return selector
        for i, m in enumerate(self.mwens):
            if m.name == selector:
                return i
        raise KeyError(f"unknown MWEN {selector!r}")
