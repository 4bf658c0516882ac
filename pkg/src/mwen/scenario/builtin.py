"""The bundled four-MWEN, 24-hour case study and helpers to cut it down.

Asset parameters come from a reference DER/DWR parameter set (generators are one
aggregate unit per MWEN carrying its sums and averages). The day
curves are synthetic closed forms so the case is deterministic:

* power load: ``base + amp * (1 + cos(2*pi*(t - 18)/24)) / 2`` (peak at hour 18)
* water load: the same shape with a second morning bump at hour 7
* solar: ``cap * sin(pi*(t - 7)/12)`` for hours 7..19, zero otherwise
* wind: a fixed 24-value shape scaled per coastal MWEN
* grid buy price: fixed ERCOT-like day shape; sell price a fixed fraction of it
"""

from __future__ import annotations

import math
from dataclasses import replace

from .types import (
    BATTERY,
    HYDROGEN,
    GeneratorSpec,
    GridCoupling,
    MwenSpec,
    NetworkPrices,
    PolicyParams,
    Profiles,
    Scenario,
    StorageSpec,
    TankSpec,
    TreatmentSpec,
    WastewaterSpec,
    WaterMainCoupling,
)

HOURS = 24
TIE_POWER_KW = 1400.0
TIE_WATER_GPH = 980.0
WATER_PRICE = 0.006
RECOVERY = 0.5

BUY_PRICE = (
    0.032, 0.030, 0.028, 0.027, 0.027, 0.029, 0.034, 0.041, 0.046, 0.048, 0.050, 0.053,
    0.057, 0.062, 0.068, 0.075, 0.084, 0.095, 0.110, 0.102, 0.080, 0.060, 0.045, 0.037,
)
SELL_FRACTION = 0.3
WIND_SHAPE = (
    0.82, 0.85, 0.88, 0.90, 0.87, 0.80, 0.70, 0.58, 0.46, 0.38, 0.33, 0.30,
    0.30, 0.33, 0.38, 0.45, 0.52, 0.58, 0.63, 0.68, 0.72, 0.76, 0.79, 0.81,
)


def _round(x):
    return round(x, 3)


def load_curve(base, amp, peak_hour=18.0):
    return tuple(
        _round(base + amp * (1 + math.cos(2 * math.pi * (t - peak_hour) / HOURS)) / 2) for t in range(HOURS)
    )


def water_curve(base, amp, morning):
    out = []
    for t in range(HOURS):
        evening = (1 + math.cos(2 * math.pi * (t - 19) / HOURS)) / 2
        bump = math.exp(-0.5 * ((t - 7) / 1.5) ** 2)
        out.append(_round(base + amp * evening + morning * bump))
    return tuple(out)


def solar_curve(cap):
    return tuple(_round(cap * math.sin(math.pi * (t - 7) / 12)) if 7 <= t <= 19 else 0.0 for t in range(HOURS))


def wind_curve(cap):
    return tuple(_round(cap * w) for w in WIND_SHAPE)


def _tank():
    return TankSpec(rate_limit_gph=900.0, cap_gal=10209.0)


def builtin_case_study() -> Scenario:
    mwen1 = MwenSpec(
        name="MWEN 1",
        tie_line_power_kw=TIE_POWER_KW,
        tie_line_water_gph=TIE_WATER_GPH,
        profiles=Profiles(
            power_load_kw=load_curve(1100.0, 1300.0),
            water_load_gph=water_curve(520.0, 700.0, 450.0),
            solar_kw=solar_curve(300.0),
            wind_kw=wind_curve(1200.0),
        ),
        generators=(GeneratorSpec(1450.0, 2900.0, 0.305, 9.85, 14.00),),
        storages=(StorageSpec(HYDROGEN, 1800.0, 9960.0, 0.80, 0.60),),
        wastewater=WastewaterSpec(720.0, 12000.0, 365.0, out_min_gph=180.0, no_load_per_h=75.0,
                                  recovery_fraction=RECOVERY),
        treatment=TreatmentSpec(1500.0, 96.0, out_min_gph=375.0, no_load_per_h=17.20),
        tanks=(_tank(),),
    )
    mwen2 = MwenSpec(
        name="MWEN 2",
        tie_line_power_kw=TIE_POWER_KW,
        tie_line_water_gph=TIE_WATER_GPH,
        profiles=Profiles(
            power_load_kw=load_curve(1500.0, 1500.0),
            water_load_gph=water_curve(650.0, 800.0, 500.0),
            solar_kw=solar_curve(1600.0),
        ),
        generators=(GeneratorSpec(2390.0, 4780.0, 0.28, 9.03, 12.78),),
        storages=(StorageSpec(BATTERY, 2900.0, 10000.0, 0.95, 0.98),),
        wastewater=WastewaterSpec(1000.0, 18600.0, 382.0, out_min_gph=250.0, no_load_per_h=75.0,
                                  recovery_fraction=RECOVERY),
        treatment=TreatmentSpec(525.0, 4400.0, out_min_gph=130.0, no_load_per_h=25.50),
        tanks=(_tank(),),
    )
    mwen3 = MwenSpec(
        name="MWEN 3",
        tie_line_power_kw=TIE_POWER_KW,
        tie_line_water_gph=TIE_WATER_GPH,
        profiles=Profiles(
            power_load_kw=load_curve(900.0, 1100.0),
            water_load_gph=water_curve(480.0, 650.0, 400.0),
            solar_kw=solar_curve(250.0),
            wind_kw=wind_curve(1000.0),
        ),
        generators=(GeneratorSpec(900.0, 1800.0, 0.26, 8.45, 11.85),),
        storages=(StorageSpec(HYDROGEN, 1500.0, 8300.0, 0.80, 0.60),),
        wastewater=WastewaterSpec(720.0, 12000.0, 365.0, out_min_gph=180.0, no_load_per_h=75.0,
                                  recovery_fraction=RECOVERY),
        treatment=TreatmentSpec(1730.0, 100.0, out_min_gph=430.0, no_load_per_h=15.00),
        tanks=(_tank(),),
    )
    mwen4 = MwenSpec(
        name="MWEN 4",
        tie_line_power_kw=TIE_POWER_KW,
        tie_line_water_gph=TIE_WATER_GPH,
        profiles=Profiles(
            power_load_kw=load_curve(500.0, 900.0),
            water_load_gph=water_curve(300.0, 500.0, 300.0),
            solar_kw=solar_curve(2400.0),
        ),
        storages=(StorageSpec(BATTERY, 3625.0, 12500.0, 0.95, 0.98),),
        wastewater=WastewaterSpec(1000.0, 18600.0, 382.0, out_min_gph=250.0, no_load_per_h=75.0,
                                  recovery_fraction=RECOVERY),
        tanks=(_tank(),),
    )
    mwens = (mwen1, mwen2, mwen3, mwen4)
    grid = GridCoupling(
        buy_price=BUY_PRICE,
        sell_price=tuple(round(SELL_FRACTION * p, 6) for p in BUY_PRICE),
        tie_limit_kw=sum(m.tie_line_power_kw for m in mwens),
    )
    main = WaterMainCoupling(import_price=(WATER_PRICE,) * HOURS,
                             tie_limit_gph=sum(m.tie_line_water_gph for m in mwens))
    return Scenario(
        name="paper_4mwen",
        horizon_periods=HOURS,
        dt_hours=1.0,
        mwens=mwens,
        grid=grid,
        water_main=main,
        network_prices=NetworkPrices.default_for(grid, main),
        policies=PolicyParams(),
    )


def subset_scenario(s: Scenario, mwens=None, periods=None, name=None) -> Scenario:
    """Restrict a scenario to some MWENs and a prefix or slice of the horizon.

    Central tie limits are reset to the sum of the kept members' tie-lines.
    """
    keep = [s.mwens[s.mwen_index(sel)] for sel in (mwens if mwens is not None else range(len(s.mwens)))]
    sl = periods if isinstance(periods, slice) else slice(0, periods if periods is not None else s.horizon_periods)

    def cut(series):
        return tuple(series[sl])

    new_mwens = []
    for m in keep:
        p = m.profiles
        new_mwens.append(replace(m, profiles=Profiles(cut(p.power_load_kw), cut(p.water_load_gph),
                                                      cut(p.solar_kw), cut(p.wind_kw))))
    grid = GridCoupling(cut(s.grid.buy_price), sum(m.tie_line_power_kw for m in keep), cut(s.grid.sell_price))
    main = WaterMainCoupling(cut(s.water_main.import_price), sum(m.tie_line_water_gph for m in keep))
    net = NetworkPrices(cut(s.network_prices.power), cut(s.network_prices.water))
    return Scenario(
        horizon_periods=len(grid.buy_price),
        dt_hours=s.dt_hours,
        mwens=tuple(new_mwens),
        grid=grid,
        water_main=main,
        network_prices=net,
        policies=s.policies,
        name=name or f"{s.name}_subset",
    )


def reduced_case_study() -> Scenario:
    """Two MWENs over the first six hours of the bundled day."""
    return subset_scenario(builtin_case_study(), mwens=[0, 1], periods=6, name="paper_2mwen_6h")
