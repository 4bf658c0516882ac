"""Scenario -> MILP encoders for networked and separate operation.

Row names follow ``<family>[m=<mwen>,<asset>=<unit>,t=<period>]`` with
0-based positions, e.g. ``eq04.up[m=0,g=0,t=7]``. Families ``eq04`` ...
``eq36`` are the constraint groups of the nexus model; ``term_energy``,
``term_water`` and ``term_wastewater`` are the end-of-horizon policy rows.
Interval families split into ``.lo`` / ``.up`` rows. Families that are plain
variable bounds (storage levels, reservoir and tank levels, tie-line limits
on P_E / W_E) are recorded in ``VariableIndex.bound_families`` instead.

All flow-priced objective terms (grid, network, water main) are multiplied by
``dt_hours`` so that a kW or gal/h flow is billed per kWh or gal.
"""

from __future__ import annotations

import math

from ..milp.problem import BINARY, CONTINUOUS, MilpProblem
from ..scenario.types import AT_LEAST, HYDROGEN, PumpSpec, Scenario
from ..scenario.validation import validate_scenario
from .index import NETWORKED, QUANTITIES, SEPARATE, VariableIndex, row_name, variable_name

INF = math.inf


class ModelError(ValueError):
    pass


def pump_power(pump: PumpSpec, flow):
    """Electrical power drawn by ``pump`` moving ``flow`` gal/h: alpha*flow/eta."""
    return pump.alpha_kwh_per_gal * flow / pump.eta


def recovery_inflow(s: Scenario, m: int) -> list[float]:
    """Reservoir inflow per period: a fraction of the previous period's water demand."""
    mw = s.mwens[m]
    rf = mw.wastewater.recovery_fraction
    load = mw.profiles.water_load_gph
    first = 0.0 if s.policies.first_period_recovery == "zero" else rf * load[0]
    return [first] + [rf * load[t - 1] for t in range(1, s.horizon_periods)]


def terminal_targets(s: Scenario, m: int) -> dict[str, float]:
    mw = s.mwens[m]
    pol = s.policies
    out = {}
    if mw.storages:
        out["term_energy"] = pol.final_energy_fraction * max(mw.profiles.power_load_kw) * s.dt_hours
    if mw.tanks:
        out["term_water"] = pol.final_water_fraction * max(mw.profiles.water_load_gph) * s.dt_hours
    if mw.wastewater is not None:
        out["term_wastewater"] = pol.final_wastewater_fraction * mw.wastewater.reservoir_cap_gal
    return out


def _check(s: Scenario):
    report = validate_scenario(s)
    if not report.ok:
        raise ModelError(f"scenario is invalid:\n{report}")


def build_networked(s: Scenario) -> tuple[MilpProblem, VariableIndex]:
    """The cooperative model over all MWENs of ``s``."""
    _check(s)
    if len(s.mwens) < 2:
        raise ModelError("networked mode needs at least 2 MWENs")
    return _Builder(s, NETWORKED, tuple(range(len(s.mwens)))).build()


def build_separate(s: Scenario, m) -> tuple[MilpProblem, VariableIndex]:
    """MWEN ``m`` (position or name) alone, coupled only to the grid and water main."""
    _check(s)
    try:
        pos = s.mwen_index(m)
    except KeyError as exc:
        raise ModelError(str(exc.args[0])) from None
    return _Builder(s, SEPARATE, (pos,)).build()


class _Builder:
    def __init__(self, s: Scenario, mode: str, members: tuple[int, ...]):
        self.s = s
        self.mode = mode
        self.members = members
        self.T = s.horizon_periods
        self.dt = s.dt_hours
        suffix = "networked" if mode == NETWORKED else f"separate_m{members[0]}"
        self.p = MilpProblem(name=f"{s.name}_{suffix}")
        self.idx = VariableIndex(mode, members, self.T)
        self.obj: dict[int, float] = {}

    # -- helpers -----------------------------------------------------------
    def var(self, qty, m, asset, t, lower=0.0, upper=INF, bound_family=None):
        integrality = BINARY if QUANTITIES[qty][1] else CONTINUOUS
        if integrality == BINARY:
            lower, upper = 0.0, 1.0
        j = self.p.add_variable(variable_name(qty, m, asset, t), lower, upper, integrality)
        self.idx.add((m, asset, qty, t), j)
        if bound_family:
            self.idx.bound_families.setdefault(bound_family, []).append(j)
        return j

    def x(self, m, asset, qty, t):
        return self.idx[(m, asset, qty, t)]

    def row(self, family, coeffs, sense, rhs=0.0, m=None, t=None, **assets):
        self.p.add_constraint(row_name(family, m, t, **assets), coeffs, sense, rhs)

    def cost(self, j, c):
        if c:
            self.obj[j] = self.obj.get(j, 0.0) + c

    # -- variables ---------------------------------------------------------
    def _variables(self):
        networked = self.mode == NETWORKED
        for m in self.members:
            mw = self.s.mwens[m]
            for g, gen in enumerate(mw.generators):
                for t in range(self.T):
                    self.var("P_G", m, g, t, 0.0, gen.p_max_kw)
                    self.var("u_G", m, g, t)
                    self.var("v_G", m, g, t, 0.0, 1.0)
            for b, st in enumerate(mw.storages):
                for t in range(self.T):
                    self.var("P_ESc", m, b, t, 0.0, st.rate_limit_kw)
                    self.var("P_ESd", m, b, t, 0.0, st.rate_limit_kw)
                    self.var("e_ESc", m, b, t)
                    self.var("e_ESd", m, b, t)
                    self.var("EL_ES", m, b, t, st.level_min_kwh, st.level_max_kwh, bound_family="eq10")
                    if st.kind == HYDROGEN:
                        self.var("W_ES", m, b, t)
            for t in range(self.T):
                self.var("P_grid_in", m, None, t)
                self.var("P_grid_out", m, None, t)
                self.var("P_net", m, None, t, -INF, INF)
                if networked:
                    lim = mw.tie_line_power_kw
                    self.var("P_N", m, None, t, -INF, INF)
                    self.var("P_E", m, None, t, -lim, lim, bound_family="eq15")
                else:
                    self.var("p_in", m, None, t)
                    self.var("p_out", m, None, t)
            ww = mw.wastewater
            if ww is not None:
                for t in range(self.T):
                    self.var("W_WW", m, None, t, 0.0, ww.out_max_gph)
                    self.var("u_WW", m, None, t)
                    self.var("WL_rWW", m, None, t, 0.0, ww.reservoir_cap_gal, bound_family="eq22")
                    self.var("P_WW", m, None, t)
                    self.var("P_WW_pump", m, None, t)
            wt = mw.treatment
            if wt is not None:
                for t in range(self.T):
                    self.var("W_WT", m, None, t, 0.0, wt.out_max_gph)
                    self.var("u_WT", m, None, t)
                    self.var("P_WT", m, None, t)
                    self.var("P_WT_pump", m, None, t)
            for k, tank in enumerate(mw.tanks):
                for t in range(self.T):
                    self.var("W_STc", m, k, t, 0.0, tank.rate_limit_gph)
                    self.var("W_STd", m, k, t, 0.0, tank.rate_limit_gph)
                    self.var("sp_ST", m, k, t)
                    self.var("sv_ST", m, k, t)
                    self.var("WL_ST", m, k, t, 0.0, tank.cap_gal, bound_family="eq30")
                    self.var("P_ST_pump", m, k, t)
            for t in range(self.T):
                self.var("W_main_in", m, None, t)
                if networked:
                    lim = mw.tie_line_water_gph
                    self.var("W_N", m, None, t, -INF, INF)
                    self.var("W_E", m, None, t, -lim, lim, bound_family="eq33")
        if networked:
            for t in range(self.T):
                self.var("p_in", None, None, t)
                self.var("p_out", None, None, t)

    # -- rows --------------------------------------------------------------
    def _power(self, m):
        s, dt, x = self.s, self.dt, self.x
        mw = s.mwens[m]
        prof = mw.profiles
        networked = self.mode == NETWORKED
        for g, gen in enumerate(mw.generators):
            for t in range(self.T):
                P, u, v = x(m, g, "P_G", t), x(m, g, "u_G", t), x(m, g, "v_G", t)
                self.row("eq04.lo", {P: 1.0, u: -gen.p_min_kw}, ">=", 0.0, m, t, g=g)
                self.row("eq04.up", {P: 1.0, u: -gen.p_max_kw}, "<=", 0.0, m, t, g=g)
                if t == 0:
                    self.row("eq05", {v: 1.0, u: -1.0}, ">=", -float(gen.initial_on), m, t, g=g)
                else:
                    self.row("eq05", {v: 1.0, u: -1.0, x(m, g, "u_G", t - 1): 1.0}, ">=", 0.0, m, t, g=g)
                self.cost(v, gen.startup_cost)
                self.cost(u, dt * gen.no_load_per_h)
                self.cost(P, dt * gen.cost_per_kwh)
        for b, st in enumerate(mw.storages):
            for t in range(self.T):
                Pc, Pd = x(m, b, "P_ESc", t), x(m, b, "P_ESd", t)
                ec, ed = x(m, b, "e_ESc", t), x(m, b, "e_ESd", t)
                EL = x(m, b, "EL_ES", t)
                self.row("eq06", {Pc: 1.0, ec: -st.rate_limit_kw}, "<=", 0.0, m, t, b=b)
                self.row("eq07", {Pd: 1.0, ed: -st.rate_limit_kw}, "<=", 0.0, m, t, b=b)
                self.row("eq08", {ec: 1.0, ed: 1.0}, "<=", 1.0, m, t, b=b)
                coeffs = {EL: 1.0, Pc: -dt * st.eta_charge, Pd: dt / st.eta_discharge}
                if t == 0:
                    self.row("eq09", coeffs, "=", st.initial_level_kwh, m, t, b=b)
                else:
                    coeffs[x(m, b, "EL_ES", t - 1)] = -1.0
                    self.row("eq09", coeffs, "=", 0.0, m, t, b=b)
                if st.kind == HYDROGEN:
                    self.row("eq11", {x(m, b, "W_ES", t): 1.0, Pc: -st.water_per_kwh_charged}, "=", 0.0, m, t, b=b)
        for t in range(self.T):
            gin, gout, net = x(m, None, "P_grid_in", t), x(m, None, "P_grid_out", t), x(m, None, "P_net", t)
            bal = {gin: 1.0, gout: -1.0, net: -1.0}
            for g in range(len(mw.generators)):
                bal[x(m, g, "P_G", t)] = 1.0
            for b in range(len(mw.storages)):
                bal[x(m, b, "P_ESd", t)] = 1.0
                bal[x(m, b, "P_ESc", t)] = -1.0
            if networked:
                bal[x(m, None, "P_N", t)] = 1.0
            self.row("eq12", bal, "=", 0.0, m, t)

            load = {net: 1.0}
            if mw.wastewater is not None:
                load[x(m, None, "P_WW", t)] = -1.0
                load[x(m, None, "P_WW_pump", t)] = -1.0
            if mw.treatment is not None:
                load[x(m, None, "P_WT", t)] = -1.0
                load[x(m, None, "P_WT_pump", t)] = -1.0
            for k in range(len(mw.tanks)):
                load[x(m, k, "P_ST_pump", t)] = -1.0
            self.row("eq13", load, "=", prof.power_load_kw[t] - prof.solar_kw[t] - prof.wind_kw[t], m, t)

            self.cost(gin, dt * s.grid.buy_price[t])
            self.cost(gout, -dt * s.grid.sell_price[t])
            if networked:
                PN, PE = x(m, None, "P_N", t), x(m, None, "P_E", t)
                self.row("eq14", {PE: 1.0, gin: -1.0, gout: 1.0, PN: -1.0}, "=", 0.0, m, t)
                self.cost(PN, dt * s.network_prices.power[t])

    def _water(self, m):
        s, dt, x = self.s, self.dt, self.x
        mw = s.mwens[m]
        networked = self.mode == NETWORKED
        ww = mw.wastewater
        if ww is not None:
            inflow = recovery_inflow(s, m)
            for t in range(self.T):
                W, u = x(m, None, "W_WW", t), x(m, None, "u_WW", t)
                WL, P, Pp = x(m, None, "WL_rWW", t), x(m, None, "P_WW", t), x(m, None, "P_WW_pump", t)
                self.row("eq20.lo", {W: 1.0, u: -ww.out_min_gph}, ">=", 0.0, m, t)
                self.row("eq20.up", {W: 1.0, u: -ww.out_max_gph}, "<=", 0.0, m, t)
                coeffs = {WL: 1.0, W: dt}
                if t == 0:
                    self.row("eq21", coeffs, "=", dt * inflow[t] + ww.initial_reservoir_gal, m, t)
                else:
                    coeffs[x(m, None, "WL_rWW", t - 1)] = -1.0
                    self.row("eq21", coeffs, "=", dt * inflow[t], m, t)
                self.row("eq23", {W: 1.0, P: -ww.gal_per_kwh}, "=", 0.0, m, t)
                self.row("eq36", {Pp: ww.pump.eta, W: -ww.pump.alpha_kwh_per_gal}, "=", 0.0, m, t, pump="ww")
                self.cost(u, dt * ww.no_load_per_h)
        wt = mw.treatment
        if wt is not None:
            for t in range(self.T):
                W, u = x(m, None, "W_WT", t), x(m, None, "u_WT", t)
                P, Pp = x(m, None, "P_WT", t), x(m, None, "P_WT_pump", t)
                self.row("eq24.lo", {W: 1.0, u: -wt.out_min_gph}, ">=", 0.0, m, t)
                self.row("eq24.up", {W: 1.0, u: -wt.out_max_gph}, "<=", 0.0, m, t)
                self.row("eq25", {W: 1.0, P: -wt.gal_per_kwh}, "=", 0.0, m, t)
                self.row("eq36", {Pp: wt.pump.eta, W: -wt.pump.alpha_kwh_per_gal}, "=", 0.0, m, t, pump="wt")
                self.cost(u, dt * wt.no_load_per_h)
        for k, tank in enumerate(mw.tanks):
            for t in range(self.T):
                Wc, Wd = x(m, k, "W_STc", t), x(m, k, "W_STd", t)
                sp_, sv = x(m, k, "sp_ST", t), x(m, k, "sv_ST", t)
                WL, Pp = x(m, k, "WL_ST", t), x(m, k, "P_ST_pump", t)
                self.row("eq26", {Wc: 1.0, sp_: -tank.rate_limit_gph}, "<=", 0.0, m, t, k=k)
                self.row("eq27", {Wd: 1.0, sv: -tank.rate_limit_gph}, "<=", 0.0, m, t, k=k)
                self.row("eq28", {sp_: 1.0, sv: 1.0}, "<=", 1.0, m, t, k=k)
                coeffs = {WL: 1.0, Wc: -dt, Wd: dt}
                if t == 0:
                    self.row("eq29", coeffs, "=", tank.initial_level_gal, m, t, k=k)
                else:
                    coeffs[x(m, k, "WL_ST", t - 1)] = -1.0
                    self.row("eq29", coeffs, "=", 0.0, m, t, k=k)
                self.row("eq36", {Pp: tank.pump.eta, Wc: -tank.pump.alpha_kwh_per_gal}, "=", 0.0, m, t,
                         pump=f"st{k}")
        for t in range(self.T):
            main = x(m, None, "W_main_in", t)
            bal = {main: 1.0}
            if ww is not None:
                bal[x(m, None, "W_WW", t)] = 1.0
            if wt is not None:
                bal[x(m, None, "W_WT", t)] = 1.0
            for k in range(len(mw.tanks)):
                bal[x(m, k, "W_STd", t)] = 1.0
                bal[x(m, k, "W_STc", t)] = -1.0
            for b, st in enumerate(mw.storages):
                if st.kind == HYDROGEN:
                    bal[x(m, b, "W_ES", t)] = -1.0
            if networked:
                bal[x(m, None, "W_N", t)] = 1.0
            self.row("eq31", bal, "=", mw.profiles.water_load_gph[t], m, t)
            self.cost(main, dt * s.water_main.import_price[t])
            if networked:
                WN, WE = x(m, None, "W_N", t), x(m, None, "W_E", t)
                self.row("eq32", {WE: 1.0, main: -1.0, WN: -1.0}, "=", 0.0, m, t)
                self.cost(WN, dt * s.network_prices.water[t])

    def _coupling(self):
        s, x = self.s, self.x
        for t in range(self.T):
            if self.mode == NETWORKED:
                ms = self.members
                pin, pout = x(None, None, "p_in", t), x(None, None, "p_out", t)
                self.row("eq16", {x(m, None, "P_N", t): 1.0 for m in ms}, "=", 0.0, t=t)
                gin = {x(m, None, "P_grid_in", t): 1.0 for m in ms}
                gin[pin] = -s.grid.tie_limit_kw
                self.row("eq17", gin, "<=", 0.0, t=t)
                gout = {x(m, None, "P_grid_out", t): 1.0 for m in ms}
                gout[pout] = -s.grid.tie_limit_kw
                self.row("eq18", gout, "<=", 0.0, t=t)
                self.row("eq19", {pin: 1.0, pout: 1.0}, "<=", 1.0, t=t)
                self.row("eq34", {x(m, None, "W_N", t): 1.0 for m in ms}, "=", 0.0, t=t)
                self.row("eq35", {x(m, None, "W_main_in", t): 1.0 for m in ms}, "<=", s.water_main.tie_limit_gph, t=t)
            else:
                (m,) = self.members
                mw = s.mwens[m]
                pin, pout = x(m, None, "p_in", t), x(m, None, "p_out", t)
                self.row("eq17", {x(m, None, "P_grid_in", t): 1.0, pin: -mw.tie_line_power_kw}, "<=", 0.0, m, t)
                self.row("eq18", {x(m, None, "P_grid_out", t): 1.0, pout: -mw.tie_line_power_kw}, "<=", 0.0, m, t)
                self.row("eq19", {pin: 1.0, pout: 1.0}, "<=", 1.0, m, t)
                self.row("eq35", {x(m, None, "W_main_in", t): 1.0}, "<=", mw.tie_line_water_gph, m, t)

    def _terminal(self, m):
        mw = self.s.mwens[m]
        last = self.T - 1
        targets = terminal_targets(self.s, m)
        storage_sense = ">=" if self.s.policies.terminal_sense_storage == AT_LEAST else "="
        if "term_energy" in targets:
            coeffs = {self.x(m, b, "EL_ES", last): 1.0 for b in range(len(mw.storages))}
            self.row("term_energy", coeffs, storage_sense, targets["term_energy"], m)
        if "term_water" in targets:
            coeffs = {self.x(m, k, "WL_ST", last): 1.0 for k in range(len(mw.tanks))}
            self.row("term_water", coeffs, storage_sense, targets["term_water"], m)
        if "term_wastewater" in targets:
            self.row("term_wastewater", {self.x(m, None, "WL_rWW", last): 1.0}, "<=", targets["term_wastewater"], m)

    def build(self):
        self._variables()
        for m in self.members:
            self._power(m)
            self._water(m)
        self._coupling()
        for m in self.members:
            self._terminal(m)
        self.p.set_objective(self.obj)
        return self.p, self.idx
