"""Independent reference computations used by the tests.

Nothing here calls the package's own LP/MILP code: LPs go to HiGHS (through
highspy or scipy.optimize.linprog), and binaries are enumerated explicitly.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import linprog

from mwen.milp import BINARY, MilpProblem
from mwen.scenario import (
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


def random_milp(rng, max_binaries=10, max_continuous=20, max_rows=14) -> MilpProblem:
    nb = int(rng.integers(1, max_binaries + 1))
    nc = int(rng.integers(0, max_continuous + 1))
    m = int(rng.integers(1, max_rows + 1))
    p = MilpProblem("random")
    for j in range(nb):
        p.add_variable(f"b{j}", 0, 1, BINARY)
    for j in range(nc):
        p.add_variable(f"x{j}", 0, float(rng.uniform(1, 10)))
    n = nb + nc
    for i in range(m):
        coeffs = {j: float(rng.integers(-5, 6)) for j in range(n) if rng.random() < 0.5}
        sense = str(rng.choice(["<=", ">=", "="], p=[0.65, 0.3, 0.05]))
        p.add_constraint(f"r{i}", coeffs, sense, float(rng.integers(-3, 10)))
    p.set_objective({j: float(rng.normal()) for j in range(n)})
    return p


def random_lp(rng, n=None, m=None) -> MilpProblem:
    n = n or int(rng.integers(1, 16))
    m = m or int(rng.integers(1, 12))
    p = MilpProblem("random_lp")
    for j in range(n):
        lo = float(rng.choice([0.0, -5.0, -np.inf], p=[0.6, 0.3, 0.1]))
        up = float(rng.choice([10.0, np.inf, 3.0], p=[0.5, 0.3, 0.2]))
        p.add_variable(f"x{j}", lo, up)
    for i in range(m):
        coeffs = {j: float(rng.integers(-4, 5)) for j in range(n) if rng.random() < 0.6}
        sense = str(rng.choice(["<=", ">=", "="], p=[0.6, 0.3, 0.1]))
        p.add_constraint(f"r{i}", coeffs, sense, float(rng.integers(-5, 10)))
    p.set_objective({j: float(rng.integers(-3, 4)) for j in range(n)})
    return p


def linprog_reference(p: MilpProblem, fixed: dict[int, float] | None = None):
    """(status, objective) of the LP relaxation from scipy's HiGHS interface."""
    a = p.arrays()
    lb, ub = a.lb.copy(), a.ub.copy()
    for j, v in (fixed or {}).items():
        lb[j] = ub[j] = v
    A = a.A.toarray()
    eq = a.row_lo == a.row_hi
    le = np.isfinite(a.row_hi) & ~eq
    ge = np.isfinite(a.row_lo) & ~eq
    A_ub = np.vstack([A[le], -A[ge]])
    b_ub = np.concatenate([a.row_hi[le], -a.row_lo[ge]])
    res = linprog(
        a.c,
        A_ub=A_ub if len(b_ub) else None,
        b_ub=b_ub if len(b_ub) else None,
        A_eq=A[eq] if eq.any() else None,
        b_eq=a.row_lo[eq] if eq.any() else None,
        bounds=list(zip(np.where(np.isinf(lb), None, lb), np.where(np.isinf(ub), None, ub))),
        method="highs",
    )
    if res.status == 2:
        return "infeasible", math.inf
    if res.status == 3:
        return "unbounded", -math.inf
    assert res.status == 0, res.message
    return "optimal", float(res.fun) + a.constant


def brute_force_milp(p: MilpProblem) -> float:
    """Minimum over every binary assignment of the remaining LP (inf if infeasible)."""
    import highspy

    a = p.arrays()
    inf = highspy.kHighsInf
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    n = p.num_variables
    h.addVars(n, np.where(np.isinf(a.lb), -inf, a.lb), np.where(np.isinf(a.ub), inf, a.ub))
    h.changeColsCost(n, np.arange(n, dtype=np.int32), a.c)
    A = a.A.tocsr()
    for i in range(A.shape[0]):
        s, e = A.indptr[i], A.indptr[i + 1]
        h.addRow(
            -inf if np.isinf(a.row_lo[i]) else a.row_lo[i],
            inf if np.isinf(a.row_hi[i]) else a.row_hi[i],
            e - s,
            A.indices[s:e].astype(np.int32),
            A.data[s:e],
        )
    binaries = np.flatnonzero(a.binary)
    best = math.inf
    for combo in itertools.product((0.0, 1.0), repeat=len(binaries)):
        for j, v in zip(binaries, combo):
            h.changeColBounds(int(j), v, v)
        h.run()
        status = h.getModelStatus()
        if status == highspy.HighsModelStatus.kOptimal:
            best = min(best, h.getInfo().objective_function_value + a.constant)
        elif status == highspy.HighsModelStatus.kUnbounded:
            return -math.inf
    return best


def small_scenario(rng, n_mwens=2, periods=3) -> Scenario:
    """A random, always-feasible small scenario.

    Every MWEN's own tie-lines cover its peak power and water demand (plus
    pump power), so each separate model is feasible; central ties equal the
    sum of member ties and network power prices sit in [sell, buy].
    """
    T = periods
    mwens = []
    for i in range(n_mwens):
        load = rng.uniform(50, 400, T).round(2)
        water = rng.uniform(20, 300, T).round(2)
        solar = (rng.uniform(0, 250, T) * (rng.random() < 0.7)).round(2)
        gens = ()
        if rng.random() < 0.7:
            pmin = round(float(rng.uniform(20, 150)), 1)
            gens = (GeneratorSpec(pmin, pmin + round(float(rng.uniform(50, 300)), 1),
                                  round(float(rng.uniform(0.05, 0.4)), 3), round(float(rng.uniform(0, 8)), 2),
                                  round(float(rng.uniform(0, 10)), 2), initial_on=bool(rng.random() < 0.3)),)
        kind = HYDROGEN if rng.random() < 0.5 else BATTERY
        cap = round(float(rng.uniform(100, 800)), 1)
        storages = (StorageSpec(kind, round(float(rng.uniform(30, 200)), 1), cap,
                                round(float(rng.uniform(0.6, 1.0)), 2), round(float(rng.uniform(0.6, 1.0)), 2)),)
        ww = WastewaterSpec(round(float(rng.uniform(100, 300)), 1), round(float(rng.uniform(800, 3000)), 0),
                            round(float(rng.uniform(200, 400)), 0), out_min_gph=round(float(rng.uniform(0, 50)), 1),
                            no_load_per_h=round(float(rng.uniform(0, 10)), 2))
        wt = None
        if rng.random() < 0.6:
            wt = TreatmentSpec(round(float(rng.uniform(100, 400)), 1), round(float(rng.uniform(80, 500)), 0),
                               out_min_gph=round(float(rng.uniform(0, 60)), 1),
                               no_load_per_h=round(float(rng.uniform(0, 5)), 2))
        tanks = (TankSpec(round(float(rng.uniform(50, 200)), 1), round(float(rng.uniform(300, 1500)), 0)),)
        mwens.append(MwenSpec(
            name=f"M{i + 1}",
            tie_line_power_kw=float(load.max() + 60.0),
            tie_line_water_gph=float(water.max() + 60.0),
            profiles=Profiles(load, water, solar),
            generators=gens,
            storages=storages,
            wastewater=ww,
            treatment=wt,
            tanks=tanks,
        ))
    buy = rng.uniform(0.03, 0.2, T).round(4)
    sell = (buy * rng.uniform(0.2, 0.9, T)).round(4)
    grid = GridCoupling(buy, sum(m.tie_line_power_kw for m in mwens), sell)
    main = WaterMainCoupling(rng.uniform(0.002, 0.01, T).round(5), sum(m.tie_line_water_gph for m in mwens))
    mix = rng.uniform(0, 1, T)
    prices = NetworkPrices(sell + mix * (buy - sell), main.import_price * rng.uniform(0, 1, T))
    policies = PolicyParams(terminal_sense_storage="at-least", final_energy_fraction=0.1,
                            final_water_fraction=0.1, final_wastewater_fraction=0.9)
    return Scenario(T, 1.0, tuple(mwens), grid, main, prices, policies, name="random_small")
