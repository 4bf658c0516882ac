"""Independent checks and cost accounting over Schedules.

Nothing here goes through the MILP layer: every constraint family is
re-evaluated directly from schedule arrays and scenario data, so a wrong
encoder and a wrong checker would have to agree by accident to hide a bug.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .model.index import NETWORKED
from .model.schedule import MwenSchedule, Schedule
from .scenario.types import AT_LEAST, HYDROGEN, Scenario

UNDEFINED = "undefined"


class AuditError(ValueError):
    pass


@dataclass(frozen=True)
class ConstraintViolation:
    equation: str  # "eq04" .. "eq36", "term_*" or "binary"
    mwen: int | None
    asset: int | None
    period: int | None
    residual: float
    bound: float

    def __str__(self):
        where = ", ".join(
            f"{k}={v}" for k, v in (("m", self.mwen), ("unit", self.asset), ("t", self.period)) if v is not None
        )
        return f"{self.equation}[{where}]: residual {self.residual:.3g} (bound {self.bound:g})"


@dataclass
class ViolationReport:
    tolerance: float
    violations: list[ConstraintViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __len__(self):
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)

    def equations(self) -> set[str]:
        return {v.equation for v in self.violations}

    def __str__(self):
        return "\n".join(map(str, self.violations)) or "feasible"


class _Checker:
    def __init__(self, s: Scenario, sch: Schedule, tol: float):
        self.s = s
        self.sch = sch
        self.tol = tol
        self.dt = s.dt_hours
        self.T = s.horizon_periods
        self.report = ViolationReport(tol)

    def flag(self, eq, excess, bound=0.0, m=None, asset=None):
        """Record every period where ``excess`` (amount beyond the limit) exceeds tol."""
        excess = np.broadcast_to(np.asarray(excess, dtype=float), (self.T,))
        bound = np.broadcast_to(np.asarray(bound, dtype=float), (self.T,))
        for t in np.flatnonzero(~(excess <= self.tol)):
            self.report.violations.append(ConstraintViolation(eq, m, asset, int(t), float(excess[t]), float(bound[t])))

    def flag_once(self, eq, excess, bound, m):
        if not excess <= self.tol:
            self.report.violations.append(ConstraintViolation(eq, m, None, None, float(excess), float(bound)))

    def equal(self, eq, lhs, rhs, m=None, asset=None):
        self.flag(eq, np.abs(np.asarray(lhs) - np.asarray(rhs)), rhs, m, asset)

    @staticmethod
    def prev(series, initial):
        return np.concatenate(([initial], series[:-1]))

    def binaries(self, ms: MwenSchedule, m):
        for key in ("u_G", "e_ESc", "e_ESd", "sp_ST", "sv_ST"):
            arr = np.atleast_2d(ms[key])
            for unit, row in enumerate(arr):
                self.flag("binary", np.minimum(np.abs(row), np.abs(row - 1.0)), 1.0, m, unit)
        for key in ("u_WW", "u_WT", "p_in", "p_out"):
            row = ms[key]
            self.flag("binary", np.minimum(np.abs(row), np.abs(row - 1.0)), 1.0, m)

    def power(self, ms: MwenSchedule, m):
        mw = self.s.mwens[m]
        dt = self.dt
        for g, gen in enumerate(mw.generators):
            P, u, v = ms["P_G"][g], ms["u_G"][g], ms["v_G"][g]
            self.flag("eq04", gen.p_min_kw * u - P, gen.p_min_kw * u, m, g)
            self.flag("eq04", P - gen.p_max_kw * u, gen.p_max_kw * u, m, g)
            u_prev = self.prev(u, float(gen.initial_on))
            self.flag("eq05", (u - u_prev) - v, u - u_prev, m, g)
            self.flag("eq05", np.maximum(-v, v - 1.0), 1.0, m, g)
        for b, st in enumerate(mw.storages):
            Pc, Pd, ec, ed = ms["P_ESc"][b], ms["P_ESd"][b], ms["e_ESc"][b], ms["e_ESd"][b]
            EL = ms["EL_ES"][b]
            self.flag("eq06", np.maximum(-Pc, Pc - st.rate_limit_kw * ec), st.rate_limit_kw, m, b)
            self.flag("eq07", np.maximum(-Pd, Pd - st.rate_limit_kw * ed), st.rate_limit_kw, m, b)
            self.flag("eq08", ec + ed - 1.0, 1.0, m, b)
            expected = self.prev(EL, st.initial_level_kwh) + dt * (st.eta_charge * Pc - Pd / st.eta_discharge)
            self.equal("eq09", EL, expected, m, b)
            self.flag("eq10", np.maximum(st.level_min_kwh - EL, EL - st.level_max_kwh), st.level_max_kwh, m, b)
            if st.kind == HYDROGEN:
                self.equal("eq11", ms["W_ES"][b], st.water_per_kwh_charged * Pc, m, b)
            else:
                self.equal("eq11", ms["W_ES"][b], 0.0, m, b)
        prof = mw.profiles
        gen_total = ms["P_G"].sum(axis=0)
        storage_net = (ms["P_ESd"] - ms["P_ESc"]).sum(axis=0)
        supply = gen_total + storage_net + ms["P_grid_in"] - ms["P_grid_out"] + ms["P_N"]
        self.equal("eq12", supply, ms["P_net"], m)
        net_load = (
            np.asarray(prof.power_load_kw) - np.asarray(prof.solar_kw) - np.asarray(prof.wind_kw)
            + ms["P_WW"] + ms["P_WW_pump"] + ms["P_WT"] + ms["P_WT_pump"] + ms["P_ST_pump"].sum(axis=0)
        )
        self.equal("eq13", ms["P_net"], net_load, m)
        if self.sch.mode == NETWORKED:
            self.equal("eq14", ms["P_E"], ms["P_grid_in"] - ms["P_grid_out"] + ms["P_N"], m)
            lim = mw.tie_line_power_kw
            self.flag("eq15", np.abs(ms["P_E"]) - lim, lim, m)
        else:
            lim = mw.tie_line_power_kw
            self.flag("eq17", np.maximum(-ms["P_grid_in"], ms["P_grid_in"] - lim * ms["p_in"]), lim, m)
            self.flag("eq18", np.maximum(-ms["P_grid_out"], ms["P_grid_out"] - lim * ms["p_out"]), lim, m)
            self.flag("eq19", ms["p_in"] + ms["p_out"] - 1.0, 1.0, m)

    def water(self, ms: MwenSchedule, m):
        mw = self.s.mwens[m]
        dt = self.dt
        load = np.asarray(mw.profiles.water_load_gph)
        ww = mw.wastewater
        if ww is not None:
            W, u, WL = ms["W_WW"], ms["u_WW"], ms["WL_rWW"]
            self.flag("eq20", ww.out_min_gph * u - W, ww.out_min_gph, m)
            self.flag("eq20", W - ww.out_max_gph * u, ww.out_max_gph, m)
            first = 0.0 if self.s.policies.first_period_recovery == "zero" else load[0]
            inflow = ww.recovery_fraction * np.concatenate(([first], load[:-1]))
            self.equal("eq21", WL, self.prev(WL, ww.initial_reservoir_gal) + dt * (inflow - W), m)
            self.flag("eq22", np.maximum(-WL, WL - ww.reservoir_cap_gal), ww.reservoir_cap_gal, m)
            self.equal("eq23", W, ww.gal_per_kwh * ms["P_WW"], m)
            self.equal("eq36", ww.pump.eta * ms["P_WW_pump"], ww.pump.alpha_kwh_per_gal * W, m)
        wt = mw.treatment
        if wt is not None:
            W, u = ms["W_WT"], ms["u_WT"]
            self.flag("eq24", wt.out_min_gph * u - W, wt.out_min_gph, m)
            self.flag("eq24", W - wt.out_max_gph * u, wt.out_max_gph, m)
            self.equal("eq25", W, wt.gal_per_kwh * ms["P_WT"], m)
            self.equal("eq36", wt.pump.eta * ms["P_WT_pump"], wt.pump.alpha_kwh_per_gal * W, m)
        for k, tank in enumerate(mw.tanks):
            Wc, Wd, sp_, sv = ms["W_STc"][k], ms["W_STd"][k], ms["sp_ST"][k], ms["sv_ST"][k]
            WL = ms["WL_ST"][k]
            self.flag("eq26", np.maximum(-Wc, Wc - tank.rate_limit_gph * sp_), tank.rate_limit_gph, m, k)
            self.flag("eq27", np.maximum(-Wd, Wd - tank.rate_limit_gph * sv), tank.rate_limit_gph, m, k)
            self.flag("eq28", sp_ + sv - 1.0, 1.0, m, k)
            self.equal("eq29", WL, self.prev(WL, tank.initial_level_gal) + dt * (Wc - Wd), m, k)
            self.flag("eq30", np.maximum(-WL, WL - tank.cap_gal), tank.cap_gal, m, k)
            self.equal("eq36", tank.pump.eta * ms["P_ST_pump"][k], tank.pump.alpha_kwh_per_gal * Wc, m, k)
        supply = (
            ms["W_WW"] + ms["W_WT"] + (ms["W_STd"] - ms["W_STc"]).sum(axis=0) + ms["W_main_in"] + ms["W_N"]
        )
        self.equal("eq31", supply, load + ms["W_ES"].sum(axis=0), m)
        self.flag("eq35", -ms["W_main_in"], 0.0, m)
        if self.sch.mode == NETWORKED:
            self.equal("eq32", ms["W_E"], ms["W_main_in"] + ms["W_N"], m)
            lim = mw.tie_line_water_gph
            self.flag("eq33", np.abs(ms["W_E"]) - lim, lim, m)
        else:
            self.flag("eq35", ms["W_main_in"] - mw.tie_line_water_gph, mw.tie_line_water_gph, m)

    def terminal(self, ms: MwenSchedule, m):
        mw = self.s.mwens[m]
        pol = self.s.policies
        at_least = pol.terminal_sense_storage == AT_LEAST
        if mw.storages:
            target = pol.final_energy_fraction * max(mw.profiles.power_load_kw) * self.dt
            level = float(ms["EL_ES"][:, -1].sum())
            self.flag_once("term_energy", target - level if at_least else abs(level - target), target, m)
        if mw.tanks:
            target = pol.final_water_fraction * max(mw.profiles.water_load_gph) * self.dt
            level = float(ms["WL_ST"][:, -1].sum())
            self.flag_once("term_water", target - level if at_least else abs(level - target), target, m)
        if mw.wastewater is not None:
            target = pol.final_wastewater_fraction * mw.wastewater.reservoir_cap_gal
            self.flag_once("term_wastewater", float(ms["WL_rWW"][-1]) - target, target, m)

    def network(self):
        sch, s = self.sch, self.s
        if sch.mode != NETWORKED:
            return
        stack = lambda key: np.sum([ms[key] for ms in sch.mwens], axis=0)  # noqa: E731
        self.flag("eq16", np.abs(stack("P_N")), 0.0)
        p_in, p_out = sch.aggregate["p_in"], sch.aggregate["p_out"]
        for key, row in (("p_in", p_in), ("p_out", p_out)):
            self.flag("binary", np.minimum(np.abs(row), np.abs(row - 1.0)), 1.0)
        lim = s.grid.tie_limit_kw
        buys, sells = stack("P_grid_in"), stack("P_grid_out")
        neg_buy = np.max([-ms["P_grid_in"] for ms in sch.mwens], axis=0)
        neg_sell = np.max([-ms["P_grid_out"] for ms in sch.mwens], axis=0)
        self.flag("eq17", np.maximum(neg_buy, buys - lim * p_in), lim)
        self.flag("eq18", np.maximum(neg_sell, sells - lim * p_out), lim)
        self.flag("eq19", p_in + p_out - 1.0, 1.0)
        self.flag("eq34", np.abs(stack("W_N")), 0.0)
        self.flag("eq35", stack("W_main_in") - s.water_main.tie_limit_gph, s.water_main.tie_limit_gph)

    def run(self):
        for ms in self.sch.mwens:
            self.binaries(ms, ms.position)
            self.power(ms, ms.position)
            self.water(ms, ms.position)
            self.terminal(ms, ms.position)
        self.network()
        return self.report


def _check_shapes(s: Scenario, sch: Schedule):
    T = s.horizon_periods
    if sch.horizon != T:
        raise AuditError(f"schedule horizon {sch.horizon} does not match scenario horizon {T}")
    for ms in sch.mwens:
        if not 0 <= ms.position < len(s.mwens):
            raise AuditError(f"schedule MWEN position {ms.position} not in scenario")
        mw = s.mwens[ms.position]
        counts = {"P_G": len(mw.generators), "EL_ES": len(mw.storages), "WL_ST": len(mw.tanks)}
        for key, arr in ms.values.items():
            shape = np.shape(arr)
            if shape[-1] != T:
                raise AuditError(f"{ms.name}: {key} has {shape[-1]} periods, expected {T}")
        for key, n in counts.items():
            if np.shape(ms[key])[0] != n:
                raise AuditError(f"{ms.name}: {key} has {np.shape(ms[key])[0]} units, expected {n}")


def check_feasibility(s: Scenario, sch: Schedule, tol: float = 1e-6) -> ViolationReport:
    """Re-evaluate every applicable constraint of the schedule with absolute tolerance ``tol``."""
    _check_shapes(s, sch)
    return _Checker(s, sch, tol).run()


# -- costs -------------------------------------------------------------------

_COST_PARTS = (
    "startup", "generation_no_load", "generation", "grid_purchase", "grid_sale", "network_power",
    "water_no_load", "main_water", "network_water",
)


@dataclass(frozen=True)
class CostBreakdown:
    name: str
    startup: float = 0.0
    generation_no_load: float = 0.0
    generation: float = 0.0
    grid_purchase: float = 0.0
    grid_sale: float = 0.0  # negative: revenue
    network_power: float = 0.0  # signed: positive pays for imports
    water_no_load: float = 0.0
    main_water: float = 0.0
    network_water: float = 0.0

    @property
    def energy(self) -> float:
        return math.fsum(getattr(self, k) for k in _COST_PARTS[:6])

    @property
    def water(self) -> float:
        return math.fsum(getattr(self, k) for k in _COST_PARTS[6:])

    @property
    def total(self) -> float:
        return math.fsum(getattr(self, k) for k in _COST_PARTS)

    def parts(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in _COST_PARTS}


def fmt(value: float) -> str:
    """Fixed six-decimal text; negative zero prints as zero."""
    text = f"{value:.6f}"
    return "0.000000" if text == "-0.000000" else text


def _dot(a, b) -> float:
    return math.fsum(np.asarray(a, dtype=float).ravel() * np.asarray(b, dtype=float).ravel())


def mwen_cost(s: Scenario, sch: Schedule, m) -> CostBreakdown:
    """Operating cost of one MWEN: generation and grid/network power plus water inputs.

    Flow-priced terms are billed per period as price * flow * dt_hours.
    """
    pos = s.mwen_index(m)
    ms = sch.for_mwen(pos)
    mw = s.mwens[pos]
    dt = s.dt_hours
    T = s.horizon_periods
    startup = no_load = gen = 0.0
    for g, spec in enumerate(mw.generators):
        startup += spec.startup_cost * math.fsum(ms["v_G"][g])
        no_load += dt * spec.no_load_per_h * math.fsum(ms["u_G"][g])
        gen += dt * spec.cost_per_kwh * math.fsum(ms["P_G"][g])
    water_nl = 0.0
    if mw.wastewater is not None:
        water_nl += dt * mw.wastewater.no_load_per_h * math.fsum(ms["u_WW"])
    if mw.treatment is not None:
        water_nl += dt * mw.treatment.no_load_per_h * math.fsum(ms["u_WT"])
    assert len(s.grid.buy_price) == T
    return CostBreakdown(
        name=mw.name,
        startup=startup,
        generation_no_load=no_load,
        generation=gen,
        grid_purchase=dt * _dot(s.grid.buy_price, ms["P_grid_in"]),
        grid_sale=-dt * _dot(s.grid.sell_price, ms["P_grid_out"]),
        network_power=dt * _dot(s.network_prices.power, ms["P_N"]),
        water_no_load=water_nl,
        main_water=dt * _dot(s.water_main.import_price, ms["W_main_in"]),
        network_water=dt * _dot(s.network_prices.water, ms["W_N"]),
    )


def schedule_costs(s: Scenario, sch: Schedule) -> list[CostBreakdown]:
    return [mwen_cost(s, sch, ms.position) for ms in sch.mwens]


def costs_csv(costs: list[CostBreakdown]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", *_COST_PARTS, "total"])
    for c in costs:
        w.writerow([c.name, *(fmt(v) for v in c.parts().values()), fmt(c.total)])
    total = [math.fsum(getattr(c, k) for c in costs) for k in _COST_PARTS]
    w.writerow(["TOTAL", *(fmt(v) for v in total), fmt(math.fsum(c.total for c in costs))])
    return buf.getvalue()


# -- comparison tables ---------------------------------------------------------


def percent_difference(baseline: float, candidate: float) -> float | None:
    """(baseline - candidate) / baseline * 100; None when the baseline is zero."""
    if baseline == 0:
        return None
    return (baseline - candidate) / baseline * 100.0


@dataclass(frozen=True)
class ComparisonRow:
    name: str
    baseline: float
    candidate: float

    @property
    def percent(self) -> float | None:
        return percent_difference(self.baseline, self.candidate)


@dataclass
class ComparisonTable:
    baseline_label: str
    candidate_label: str
    rows: list[ComparisonRow]

    @property
    def total(self) -> ComparisonRow:
        return ComparisonRow(
            "TOTAL", math.fsum(r.baseline for r in self.rows), math.fsum(r.candidate for r in self.rows)
        )

    def all_rows(self) -> list[ComparisonRow]:
        return [*self.rows, self.total]

    def percents(self) -> list[float | None]:
        return [r.percent for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "baseline", "candidate", "percent"])
        for r in self.all_rows():
            pct = UNDEFINED if r.percent is None else fmt(r.percent)
            w.writerow([r.name, fmt(r.baseline), fmt(r.candidate), pct])
        return buf.getvalue()


def _entries(costs) -> list[tuple[str, float]]:
    out = []
    for i, c in enumerate(costs):
        if isinstance(c, CostBreakdown):
            out.append((c.name, c.total))
        else:
            out.append((f"MWEN {i + 1}", float(c)))
    return out


def _compare(baseline, candidate, labels) -> ComparisonTable:
    a, b = _entries(baseline), _entries(candidate)
    if [n for n, _ in a] != [n for n, _ in b]:
        raise AuditError("baseline and candidate cover different MWENs")
    rows = [ComparisonRow(n, x, y) for (n, x), (_, y) in zip(a, b)]
    return ComparisonTable(labels[0], labels[1], rows)


def pea_delta_report(before, after) -> ComparisonTable:
    """Per-MWEN costs without vs with proportional exchange (CostBreakdowns or plain totals)."""
    return _compare(before, after, ("before_pea", "after_pea"))


def network_vs_separate_report(separate, networked) -> ComparisonTable:
    """Per-MWEN costs operating alone vs inside the network."""
    return _compare(separate, networked, ("separate", "networked"))
