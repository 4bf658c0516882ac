"""HiGHS (through ``scipy.optimize.milp``) as an external reference backend."""

from __future__ import annotations

import math
import time

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from .problem import MilpProblem, Solution, SolveStats, SolverConfig, Status


def solve_with_highs(problem: MilpProblem, cfg: SolverConfig, relax: bool = False) -> Solution:
    problem.validate()
    a = problem.arrays()
    options = {"mip_rel_gap": cfg.relative_mip_gap, "presolve": True}
    if cfg.time_limit_seconds is not None:
        options["time_limit"] = cfg.time_limit_seconds
    if cfg.node_limit is not None:
        options["node_limit"] = cfg.node_limit
    integrality = np.zeros(problem.num_variables) if relax else a.binary.astype(float)
    constraints = [LinearConstraint(a.A, a.row_lo, a.row_hi)] if problem.num_constraints else []
    start = time.perf_counter()
    res = milp(a.c, constraints=constraints, integrality=integrality,
               bounds=Bounds(a.lb, a.ub), options=options)
    stats = SolveStats(wall_time=time.perf_counter() - start)
    stats.nodes = int(getattr(res, "mip_node_count", 0) or 0)
    gap = getattr(res, "mip_gap", None)
    stats.gap = float(gap) if gap is not None else (0.0 if res.status == 0 else math.nan)
    bound = getattr(res, "mip_dual_bound", None)
    if bound is not None:
        stats.best_bound = float(bound) + a.constant
    if res.status == 0:
        status = Status.OPTIMAL
    elif res.status == 2:
        return Solution(Status.INFEASIBLE, math.nan, None, stats)
    elif res.status == 3:
        return Solution(Status.UNBOUNDED, -math.inf, None, stats)
    elif "time" in (res.message or "").lower():
        status = Status.TIME_LIMIT
    else:
        status = Status.NODE_LIMIT
    if res.x is None:
        return Solution(status, math.nan, None, stats)
    return Solution(status, float(res.fun) + a.constant, np.asarray(res.x), stats)


def solve_mps_file(path, mip_gap: float = 1e-4, time_limit: float | None = None, with_values: bool = False):
    """Read an MPS file with ``highspy`` and solve it.

    Returns (status text, objective), plus the column values in file order
    when ``with_values`` is set.
    """
    import highspy

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", mip_gap)
    if time_limit is not None:
        h.setOptionValue("time_limit", float(time_limit))
    status = h.readModel(str(path))
    if status != highspy.HighsStatus.kOk:
        raise ValueError(f"HiGHS rejected {path}")
    h.run()
    status = h.modelStatusToString(h.getModelStatus())
    objective = h.getInfo().objective_function_value
    if with_values:
        return status, objective, np.array(h.getSolution().col_value, dtype=float)
    return status, objective
