"""Complete invariant check of a Scenario; violations are returned, not raised."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, is_dataclass

from .types import BATTERY, HYDROGEN, PumpSpec, Scenario

PRICE_TOL = 1e-12


@dataclass(frozen=True)
class Violation:
    path: str
    message: str

    def __str__(self):
        return f"{self.path}: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __len__(self):
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)

    def add(self, path, message):
        self.violations.append(Violation(path, message))

    def __str__(self):
        return "\n".join(map(str, self.violations)) or "valid"


def _finite(obj, path, report):
    """Flag NaN/inf anywhere in a (nested) dataclass."""
    for f in fields(obj):
        value = getattr(obj, f.name)
        sub = f"{path}.{f.name}"
        if isinstance(value, float) and not math.isfinite(value):
            report.add(sub, f"must be finite, got {value}")
        elif isinstance(value, tuple):
            for i, v in enumerate(value):
                if isinstance(v, float) and not math.isfinite(v):
                    report.add(f"{sub}[{i}]", f"must be finite, got {v}")
                elif is_dataclass(v):
                    _finite(v, f"{sub}[{i}]", report)
        elif is_dataclass(value):
            _finite(value, sub, report)


def _pump(p: PumpSpec, path, report):
    if p.alpha_kwh_per_gal < 0:
        report.add(f"{path}.alpha_kwh_per_gal", "must be >= 0")
    if not 0 < p.eta <= 1:
        report.add(f"{path}.eta", f"efficiency must be in (0, 1], got {p.eta}")


def _length(series, T, path, report):
    if len(series) != T:
        report.add(path, f"length {len(series)} does not match horizon_periods = {T}")


def validate_scenario(s: Scenario) -> ValidationReport:
    report = ValidationReport()
    _finite(s, "scenario", report)
    T = s.horizon_periods
    if T < 1:
        report.add("scenario.horizon_periods", "must be >= 1")
    if not s.dt_hours > 0:
        report.add("scenario.dt_hours", "must be > 0")
    if not s.mwens:
        report.add("scenario.mwens", "at least one MWEN is required")

    names = [m.name for m in s.mwens]
    for name in sorted({n for n in names if names.count(n) > 1}):
        report.add("scenario.mwens", f"duplicate MWEN name {name!r}")

    for i, m in enumerate(s.mwens):
        base = f"mwens[{i}]({m.name})"
        if m.tie_line_power_kw < 0:
            report.add(f"{base}.tie_line_power_kw", "must be >= 0")
        if m.tie_line_water_gph < 0:
            report.add(f"{base}.tie_line_water_gph", "must be >= 0")
        prof = m.profiles
        for key in ("power_load_kw", "water_load_gph", "solar_kw", "wind_kw"):
            series = getattr(prof, key)
            _length(series, T, f"{base}.profiles.{key}", report)
            for t, v in enumerate(series):
                if v < 0:
                    report.add(f"{base}.profiles.{key}[{t}]", f"must be >= 0, got {v}")

        for g, gen in enumerate(m.generators):
            gp = f"{base}.generators[{g}]"
            if not 0 <= gen.p_min_kw <= gen.p_max_kw:
                report.add(gp, f"need 0 <= p_min_kw <= p_max_kw, got {gen.p_min_kw}, {gen.p_max_kw}")
            for key in ("cost_per_kwh", "no_load_per_h", "startup_cost"):
                if getattr(gen, key) < 0:
                    report.add(f"{gp}.{key}", "cost must be >= 0")

        for b, st in enumerate(m.storages):
            sp_ = f"{base}.storages[{b}]"
            if st.kind not in (BATTERY, HYDROGEN):
                report.add(f"{sp_}.kind", f"unknown storage kind {st.kind!r}")
            if st.rate_limit_kw < 0:
                report.add(f"{sp_}.rate_limit_kw", "must be >= 0")
            if not 0 <= st.level_min_kwh <= st.level_max_kwh:
                report.add(sp_, "need 0 <= level_min_kwh <= level_max_kwh")
            if not st.level_min_kwh <= st.initial_level_kwh <= st.level_max_kwh:
                report.add(f"{sp_}.initial_level_kwh", "must lie within [level_min_kwh, level_max_kwh]")
            for key in ("eta_charge", "eta_discharge"):
                eta = getattr(st, key)
                if not 0 < eta <= 1:
                    report.add(f"{sp_}.{key}", f"efficiency must be in (0, 1], got {eta}")
            if st.water_per_kwh_charged < 0:
                report.add(f"{sp_}.water_per_kwh_charged", "must be >= 0")
            elif st.kind == BATTERY and st.water_per_kwh_charged != 0:
                report.add(f"{sp_}.water_per_kwh_charged", "must be 0 for a battery")

        ww = m.wastewater
        if ww is not None:
            wp = f"{base}.wastewater"
            if not 0 <= ww.out_min_gph <= ww.out_max_gph:
                report.add(wp, "need 0 <= out_min_gph <= out_max_gph")
            if not 0 <= ww.initial_reservoir_gal <= ww.reservoir_cap_gal:
                report.add(f"{wp}.initial_reservoir_gal", "must lie within [0, reservoir_cap_gal]")
            if not ww.gal_per_kwh > 0:
                report.add(f"{wp}.gal_per_kwh", "must be > 0")
            if ww.no_load_per_h < 0:
                report.add(f"{wp}.no_load_per_h", "cost must be >= 0")
            if not 0 <= ww.recovery_fraction <= 1:
                report.add(f"{wp}.recovery_fraction", "must be in [0, 1]")
            _pump(ww.pump, f"{wp}.pump", report)

        wt = m.treatment
        if wt is not None:
            tp = f"{base}.treatment"
            if not 0 <= wt.out_min_gph <= wt.out_max_gph:
                report.add(tp, "need 0 <= out_min_gph <= out_max_gph")
            if not wt.gal_per_kwh > 0:
                report.add(f"{tp}.gal_per_kwh", "must be > 0")
            if wt.no_load_per_h < 0:
                report.add(f"{tp}.no_load_per_h", "cost must be >= 0")
            _pump(wt.pump, f"{tp}.pump", report)

        for k, tank in enumerate(m.tanks):
            kp = f"{base}.tanks[{k}]"
            if tank.rate_limit_gph < 0:
                report.add(f"{kp}.rate_limit_gph", "must be >= 0")
            if not 0 <= tank.initial_level_gal <= tank.cap_gal:
                report.add(f"{kp}.initial_level_gal", "must lie within [0, cap_gal]")
            _pump(tank.pump, f"{kp}.pump", report)

        _terminal_targets(s, m, base, report)

    grid = s.grid
    _length(grid.buy_price, T, "grid.buy_price", report)
    _length(grid.sell_price, T, "grid.sell_price", report)
    if grid.tie_limit_kw < 0:
        report.add("grid.tie_limit_kw", "must be >= 0")
    for t, (b, sl) in enumerate(zip(grid.buy_price, grid.sell_price)):
        if sl > b + PRICE_TOL:
            report.add(f"grid.sell_price[{t}]", f"sell price {sl} exceeds buy price {b}")

    main = s.water_main
    _length(main.import_price, T, "water_main.import_price", report)
    if main.tie_limit_gph < 0:
        report.add("water_main.tie_limit_gph", "must be >= 0")
    for t, p in enumerate(main.import_price):
        if p < 0:
            report.add(f"water_main.import_price[{t}]", "must be >= 0")

    net = s.network_prices
    _length(net.power, T, "network_prices.power", report)
    _length(net.water, T, "network_prices.water", report)
    for t, (p, b, sl) in enumerate(zip(net.power, grid.buy_price, grid.sell_price)):
        if not sl - PRICE_TOL <= p <= b + PRICE_TOL:
            report.add(f"network_prices.power[{t}]",
                       f"NetworkPrices invariant: {p} not within [sell {sl}, buy {b}]")
    for t, p in enumerate(net.water):
        if p < 0:
            report.add(f"network_prices.water[{t}]", "must be >= 0")

    pol = s.policies
    for key in ("final_energy_fraction", "final_water_fraction", "final_wastewater_fraction"):
        v = getattr(pol, key)
        if not 0 <= v <= 1:
            report.add(f"policies.{key}", f"must be in [0, 1], got {v}")
    return report


def _terminal_targets(s: Scenario, m, base, report):
    """The end-of-horizon storage targets must be reachable by the installed capacity."""
    prof = m.profiles
    if not prof.power_load_kw or not prof.water_load_gph:
        return
    pol = s.policies
    if m.storages:
        target = pol.final_energy_fraction * max(prof.power_load_kw) * s.dt_hours
        lo = sum(st.level_min_kwh for st in m.storages)
        hi = sum(st.level_max_kwh for st in m.storages)
        if target > hi or (pol.terminal_sense_storage == "equality" and target < lo):
            report.add(f"{base}.storages", f"terminal energy target {target:g} kWh outside [{lo:g}, {hi:g}]")
    if m.tanks:
        target = pol.final_water_fraction * max(prof.water_load_gph) * s.dt_hours
        cap = sum(t.cap_gal for t in m.tanks)
        if target > cap:
            report.add(f"{base}.tanks", f"terminal water target {target:g} gal exceeds capacity {cap:g}")
