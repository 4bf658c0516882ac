import dataclasses
from collections import Counter

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import EXACT, solve
from mwen.audit import check_feasibility
from mwen.milp import Solution, SolverConfig, Status, solve_lp, solve_milp
from mwen.model import (
    NETWORKED,
    QUANTITIES,
    SEPARATE,
    ModelError,
    ScheduleError,
    build_networked,
    build_separate,
    extract_schedule,
    pump_power,
    row_family,
    variable_count,
)
from mwen.scenario import NetworkPrices, PumpSpec, subset_scenario
from oracles import small_scenario

FAMILIES = [f"eq{k:02d}" for k in range(4, 37)] + ["term_energy", "term_water", "term_wastewater"]


def families(problem, idx):
    rows = Counter(row_family(c.name) for c in problem.constraints)
    for fam, count in idx.bound_families.items():
        rows[fam] += len(count)
    return rows


def test_bundled_variable_count(case):
    # per period: MWEN 1 and 3 have 32 variables, MWEN 2 has 31, MWEN 4 has 24, plus 2 aggregate binaries
    p, idx = build_networked(case)
    assert p.num_variables == len(idx) == variable_count(case) == 24 * (32 + 31 + 32 + 24 + 2)


@pytest.mark.parametrize("seed", range(8))
def test_random_variable_counts(seed):
    s = small_scenario(np.random.default_rng(seed), n_mwens=3, periods=2)
    p, idx = build_networked(s)
    assert p.num_variables == variable_count(s, NETWORKED)
    for m in range(3):
        q, _ = build_separate(s, m)
        assert q.num_variables == variable_count(s, SEPARATE, m)


def test_every_quantity_appears_once_per_key(case):
    p, idx = build_networked(case)
    assert len(set(idx.positions.values())) == len(idx)
    assert idx.quantities() == set(QUANTITIES)
    names = [v.name for v in p.variables]
    assert len(set(names)) == len(names)


def test_one_network_balance_row_per_period(case):
    p, idx = build_networked(case)
    rows = families(p, idx)
    assert rows["eq16"] == 24 and rows["eq34"] == 24
    assert all(c.sense == "=" for c in p.constraints if row_family(c.name) in ("eq16", "eq34"))


def test_mwen1_generator_rows(case):
    p, idx = build_networked(case)
    by_name = {c.name: c for c in p.constraints}
    for t in (0, 7, 23):
        P, u = idx[(0, 0, "P_G", t)], idx[(0, 0, "u_G", t)]
        lo = by_name[f"eq04.lo[m=0,g=0,t={t}]"]
        up = by_name[f"eq04.up[m=0,g=0,t={t}]"]
        assert dict(lo.coeffs) == {P: 1.0, u: -1450.0} and lo.sense == ">="
        assert dict(up.coeffs) == {P: 1.0, u: -2900.0} and up.sense == "<="


def test_battery_has_no_water_coupling(case):
    p, idx = build_networked(case)
    assert not any(row_family(c.name) == "eq11" and "m=1" in c.name for c in p.constraints)
    assert idx.get(1, 0, "W_ES", 0) is None
    assert idx.get(0, 0, "W_ES", 0) is not None
    water_rows = [c for c in p.constraints if c.name.startswith("eq31[m=1,")]
    assert len(water_rows) == 24


def test_mwen4_separate(case):
    p, idx = build_separate(case, 3)
    assert not any(v.name.startswith(("P_G", "u_G", "v_G")) for v in p.variables)
    rows = families(p, idx)
    assert rows["eq24"] == 0 and rows["eq25"] == 0 and rows["eq04"] == 0
    assert "P_N" not in idx.quantities() and "W_N" not in idx.quantities()


def test_separate_counts_sum_below_networked(case):
    total = sum(build_separate(case, m)[0].num_variables for m in range(4))
    assert total < build_networked(case)[0].num_variables


def test_selector_by_name_and_errors(case):
    assert build_separate(case, case.mwens[2].name)[0].num_variables == build_separate(case, 2)[0].num_variables
    with pytest.raises((ModelError, KeyError, ValueError)):
        build_separate(case, 9)
    with pytest.raises(ModelError):
        build_networked(subset_scenario(case, mwens=[0]))


def test_invalid_scenario_is_refused(case):
    bad = dataclasses.replace(case, network_prices=NetworkPrices((1.0,) * 24, case.network_prices.water))
    with pytest.raises(ModelError):
        build_networked(bad)


def test_pump_power():
    pump = PumpSpec(0.002, 0.8)
    assert pump_power(pump, 900) == pytest.approx(2.25)
    assert pump_power(pump, 0) == 0
    assert pump_power(pump, 1800) == pytest.approx(2 * pump_power(pump, 900))


def test_family_coverage(case):
    p, idx = build_networked(case)
    rows = families(p, idx)
    missing = [f for f in FAMILIES if rows[f] == 0]
    assert not missing


def test_builder_is_pure(case):
    a, ia = build_networked(case)
    b, ib = build_networked(case)
    assert a == b and ia.positions == ib.positions


def test_toy_extraction_is_feasible():
    s = small_scenario(np.random.default_rng(5), n_mwens=1, periods=1)
    solved = solve(s, 0)
    assert solved.solution.status == Status.OPTIMAL
    report = check_feasibility(s, solved.schedule)
    assert report.ok, str(report)
    assert solved.schedule.objective == solved.solution.objective_value


def test_extraction_without_incumbent():
    s = small_scenario(np.random.default_rng(1), n_mwens=1, periods=2)
    p, idx = build_separate(s, 0)
    empty = Solution(Status.INFEASIBLE, None, None)
    with pytest.raises(ScheduleError):
        extract_schedule(empty, idx, s)


def test_near_integral_binary_is_rounded():
    s = small_scenario(np.random.default_rng(2), n_mwens=1, periods=2)
    p, idx = build_separate(s, 0)
    sol = solve_milp(p, EXACT)
    x = np.array(sol.values, dtype=float)
    j = idx[(0, 0, "sp_ST", 0)]
    x[j] = 1 - 1e-9
    sch = extract_schedule(dataclasses.replace(sol, values=x), idx, s)
    assert sch.mwens[0]["sp_ST"][0, 0] == 1.0
    x[j] = 0.5
    with pytest.raises(ScheduleError):
        extract_schedule(dataclasses.replace(sol, values=x), idx, s)


def test_network_price_invariance_small():
    s = small_scenario(np.random.default_rng(11), n_mwens=2, periods=3)
    base = solve(s).solution.objective_value
    shifted = dataclasses.replace(s, network_prices=NetworkPrices(s.grid.buy_price, tuple(np.zeros(3))))
    assert solve(shifted).solution.objective_value == pytest.approx(base, rel=1e-6)


def test_bundled_embedding(networked, separate):
    assert networked.solution.objective_value <= sum(x.solution.objective_value for x in separate) + 1e-6


@settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(seed=st.integers(0, 10**6), n=st.integers(2, 3), periods=st.integers(1, 3))
def test_embedding_property(seed, n, periods):
    s = small_scenario(np.random.default_rng(seed), n_mwens=n, periods=periods)
    net = solve(s).solution
    seps = [solve(s, m).solution for m in range(n)]
    assert net.status == Status.OPTIMAL and all(x.status == Status.OPTIMAL for x in seps)
    assert net.objective_value <= sum(x.objective_value for x in seps) + 1e-6


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_relaxation_bounds_milp(seed):
    s = small_scenario(np.random.default_rng(seed), n_mwens=2, periods=2)
    p, _ = build_networked(s)
    lp = solve_lp(p)
    mip = solve_milp(p, SolverConfig(relative_mip_gap=1e-9))
    assert lp.objective_value <= mip.objective_value + 1e-6
