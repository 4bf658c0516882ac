import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mwen.milp import (
    BINARY,
    MilpProblem,
    ProblemError,
    SolverConfig,
    Status,
    max_violation,
    solve_lp,
    solve_milp,
)
from oracles import brute_force_milp, linprog_reference, random_lp, random_milp


def test_single_bound_optimum():
    p = MilpProblem()
    x = p.add_variable("x", 0, 5)
    p.set_objective({x: -1})
    sol = solve_lp(p)
    assert sol.status == Status.OPTIMAL
    assert sol.objective_value == pytest.approx(-5)
    assert sol.values[x] == pytest.approx(5)


def test_face_optimum_objective_only():
    p = MilpProblem()
    x, y = p.add_variable("x"), p.add_variable("y")
    p.add_constraint("cap", {x: 1, y: 1}, "<=", 1)
    p.set_objective({x: -1, y: -1})
    sol = solve_lp(p)
    assert sol.status == Status.OPTIMAL
    assert sol.objective_value == pytest.approx(-1, abs=1e-9)


def test_contradictory_bounds_infeasible():
    p = MilpProblem()
    x = p.add_variable("x", -math.inf, math.inf)
    p.add_constraint("lo", {x: 1}, ">=", 2)
    p.add_constraint("hi", {x: 1}, "<=", 1)
    assert solve_lp(p).status == Status.INFEASIBLE


def test_unbounded_reported():
    p = MilpProblem()
    x = p.add_variable("x")
    y = p.add_variable("y")
    p.add_constraint("r", {x: 1, y: -1}, "<=", 1)
    p.set_objective({x: -1})
    assert solve_lp(p).status == Status.UNBOUNDED


def test_empty_problem_rejected():
    with pytest.raises(ValueError):
        solve_lp(MilpProblem())


def test_problem_invariants():
    p = MilpProblem()
    p.add_variable("x")
    with pytest.raises(ProblemError):
        p.add_variable("x")
    with pytest.raises(ProblemError):
        p.add_variable("b", 0, 2, BINARY)
    with pytest.raises(ProblemError):
        p.add_constraint("r", {5: 1.0}, "<=", 1)
    with pytest.raises(ProblemError):
        p.add_constraint("r", {0: 1.0}, "<", 1)


def test_coefficients_merged_and_sorted():
    p = MilpProblem()
    a, b = p.add_variable("a"), p.add_variable("b")
    p.add_constraint("r", [(b, 1.0), (a, 2.0), (b, 2.0), (a, -2.0)], "=", 0)
    assert p.constraints[0].coeffs == [(b, 3.0)]


def test_solver_config_rejects_bad_values():
    with pytest.raises(ValueError):
        SolverConfig(feasibility_tol=0)
    with pytest.raises(ValueError):
        SolverConfig(branching_rule="random")


def test_knapsack_pair():
    p = MilpProblem()
    a = p.add_variable("a", 0, 1, BINARY)
    b = p.add_variable("b", 0, 1, BINARY)
    p.add_constraint("cap", {a: 2, b: 3}, "<=", 4)
    p.set_objective({a: -3, b: -4})
    sol = solve_milp(p)
    assert sol.status == Status.OPTIMAL
    assert sol.objective_value == pytest.approx(-4)
    assert (round(sol.values[a]), round(sol.values[b])) == (0, 1)


def test_integral_relaxation_needs_no_branching():
    p = MilpProblem()
    a = p.add_variable("a", 0, 1, BINARY)
    x = p.add_variable("x", 0, 10)
    p.add_constraint("r", {a: 1, x: 1}, "<=", 3)
    p.set_objective({a: -1, x: -1})
    sol = solve_milp(p)
    lp = solve_lp(p)
    assert sol.stats.nodes == 0
    assert sol.objective_value == pytest.approx(lp.objective_value)


def test_binary_sum_infeasible():
    p = MilpProblem()
    a = p.add_variable("a", 0, 1, BINARY)
    b = p.add_variable("b", 0, 1, BINARY)
    p.add_constraint("sum", {a: 1, b: 1}, ">=", 3)
    assert solve_milp(p).status == Status.INFEASIBLE


def test_node_limit_carries_incumbent():
    rng = np.random.default_rng(11)
    # a problem that needs branching: equality knapsack with fractional LP
    p = MilpProblem()
    w = rng.integers(3, 20, 12)
    xs = [p.add_variable(f"b{j}", 0, 1, BINARY) for j in range(12)]
    p.add_constraint("cap", dict(zip(xs, map(float, w))), "<=", float(w.sum() // 2))
    p.set_objective({x: -float(v) * 1.01 ** j for j, (x, v) in enumerate(zip(xs, w))})
    sol = solve_milp(p, SolverConfig(node_limit=2, relative_mip_gap=1e-12))
    assert sol.status in (Status.NODE_LIMIT, Status.OPTIMAL)
    if sol.status == Status.NODE_LIMIT:
        assert sol.has_incumbent
        assert sol.stats.best_bound <= sol.objective_value + 1e-9


@pytest.mark.parametrize("seed", range(40))
def test_lp_matches_reference(seed):
    rng = np.random.default_rng(seed)
    p = random_lp(rng)
    ref_status, ref = linprog_reference(p)
    sol = solve_lp(p)
    assert sol.status.value == ref_status
    if ref_status == "optimal":
        assert sol.objective_value == pytest.approx(ref, rel=1e-6, abs=1e-6)
        assert max_violation(p, sol.values) <= 1e-7


@pytest.mark.parametrize("seed", range(30))
def test_milp_matches_enumeration(seed):
    pytest.importorskip("highspy")
    rng = np.random.default_rng(1000 + seed)
    p = random_milp(rng)
    ref = brute_force_milp(p)
    for rule in ("most-fractional", "pseudo-cost"):
        sol = solve_milp(p, SolverConfig(relative_mip_gap=1e-9, branching_rule=rule))
        if math.isinf(ref):
            assert sol.status == (Status.INFEASIBLE if ref > 0 else Status.UNBOUNDED)
        else:
            assert sol.status == Status.OPTIMAL
            assert sol.objective_value == pytest.approx(ref, abs=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_optimal_solutions_recheck_and_bound(seed):
    rng = np.random.default_rng(seed)
    p = random_milp(rng, max_binaries=8, max_continuous=10)
    cfg = SolverConfig(relative_mip_gap=1e-9)
    sol = solve_milp(p, cfg)
    if sol.status != Status.OPTIMAL:
        return
    assert max_violation(p, sol.values) <= cfg.feasibility_tol
    binaries = sol.values[[i for i, v in enumerate(p.variables) if v.is_binary]]
    assert np.all(np.minimum(np.abs(binaries), np.abs(binaries - 1)) <= cfg.integrality_tol)
    trace = sol.stats.incumbent_trace
    assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))
    relax = solve_lp(p.relaxed(), cfg)
    assert relax.objective_value <= sol.objective_value + 1e-6


def test_solve_is_deterministic():
    rng = np.random.default_rng(5)
    p = random_milp(rng)
    a, b = solve_milp(p), solve_milp(p)
    assert a.status == b.status
    assert a.stats.nodes == b.stats.nodes
    if a.has_incumbent:
        assert np.array_equal(a.values, b.values)


def test_highs_backend_agrees_with_native():
    rng = np.random.default_rng(77)
    for _ in range(10):
        p = random_milp(rng)
        a = solve_milp(p, SolverConfig(relative_mip_gap=1e-9))
        b = solve_milp(p, SolverConfig(relative_mip_gap=1e-9, backend="highs"))
        assert a.status == b.status
        if a.status == Status.OPTIMAL:
            assert a.objective_value == pytest.approx(b.objective_value, abs=1e-6)


def test_degenerate_lp_terminates():
    # many ties and a degenerate vertex at the origin
    p = MilpProblem()
    xs = [p.add_variable(f"x{j}") for j in range(6)]
    for i in range(10):
        p.add_constraint(f"r{i}", {x: float((i + j) % 3 - 1) for j, x in enumerate(xs)}, "<=", 0)
    p.add_constraint("cap", {x: 1 for x in xs}, "<=", 1)
    p.set_objective({x: -1 for x in xs})
    sol = solve_lp(p)
    ref_status, ref = linprog_reference(p)
    assert sol.status.value == ref_status
    assert sol.objective_value == pytest.approx(ref, abs=1e-9)
