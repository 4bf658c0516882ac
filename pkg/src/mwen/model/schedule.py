"""Solutions mapped back onto per-MWEN, per-period arrays."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

from ..milp.problem import Solution, SolverConfig
from ..scenario.types import Scenario
from .index import GENERATOR, NETWORKED, QUANTITIES, STORAGE, TANK, VariableIndex


class ScheduleError(ValueError):
    pass


def unit_count(mwen, kind) -> int:
    return {GENERATOR: len(mwen.generators), STORAGE: len(mwen.storages), TANK: len(mwen.tanks)}[kind]


@dataclass
class MwenSchedule:
    """Every quantity of one MWEN.

    Per-unit quantities are ``(units, T)`` arrays (``W_ES`` is all zeros for a
    battery); the rest are ``(T,)`` arrays. Quantities an MWEN does not have
    (no treatment unit, network terms in separate mode) are zero arrays.
    """

    name: str
    position: int
    values: dict[str, np.ndarray]

    def __getitem__(self, qty) -> np.ndarray:
        return self.values[qty]

    def __setitem__(self, qty, array):
        self.values[qty] = np.asarray(array, dtype=float)

    def net_power_exchange(self) -> np.ndarray:
        """L^E for power: grid import - grid export + network exchange."""
        return self["P_grid_in"] - self["P_grid_out"] + self["P_N"]

    def net_water_exchange(self) -> np.ndarray:
        return self["W_main_in"] + self["W_N"]


@dataclass
class Schedule:
    mode: str
    objective: float
    mwens: list[MwenSchedule]
    horizon: int
    aggregate: dict[str, np.ndarray] = field(default_factory=dict)  # networked p_in / p_out

    def copy(self) -> "Schedule":
        return copy.deepcopy(self)

    def for_mwen(self, position: int) -> MwenSchedule:
        for ms in self.mwens:
            if ms.position == position:
                return ms
        raise KeyError(f"schedule has no MWEN at position {position}")


def empty_schedule(s: Scenario, mode: str = NETWORKED, members=None, objective=0.0) -> Schedule:
    """An all-zero schedule with the right shapes (useful for tests and accounting)."""
    members = tuple(range(len(s.mwens))) if members is None else tuple(members)
    T = s.horizon_periods
    mwens = []
    for m in members:
        mw = s.mwens[m]
        values = {}
        for qty, (kind, _) in QUANTITIES.items():
            values[qty] = np.zeros((unit_count(mw, kind), T)) if kind else np.zeros(T)
        mwens.append(MwenSchedule(mw.name, m, values))
    aggregate = {"p_in": np.zeros(T), "p_out": np.zeros(T)} if mode == NETWORKED else {}
    return Schedule(mode, objective, mwens, T, aggregate)


def extract_schedule(sol: Solution, idx: VariableIndex, s: Scenario, cfg: SolverConfig | None = None) -> Schedule:
    """Copy solution values into a Schedule; binaries are rounded to 0/1.

    Raises ScheduleError when the solution carries no incumbent, or when a
    binary is further than ``integrality_tol`` from an integer.
    """
    if not sol.has_incumbent:
        raise ScheduleError(f"solution has no incumbent (status {sol.status.value})")
    tol = (cfg or SolverConfig()).integrality_tol
    x = np.asarray(sol.values, dtype=float)
    sch = empty_schedule(s, idx.mode, idx.members, sol.objective_value)
    for (m, asset, qty, t), j in idx.positions.items():
        value = x[j]
        if QUANTITIES[qty][1]:
            r = round(value)
            if abs(value - r) > tol:
                raise ScheduleError(f"binary {qty} at m={m}, t={t} is fractional ({value!r})")
            value = float(r)
        if m is None:
            sch.aggregate[qty][t] = value
        else:
            arr = sch.for_mwen(m).values[qty]
            if asset is None:
                arr[t] = value
            else:
                arr[asset, t] = value
    return sch
