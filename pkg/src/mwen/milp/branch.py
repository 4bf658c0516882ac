"""LP and MILP entry points: simplex for relaxations, branch-and-bound for binaries."""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .problem import MilpProblem, Solution, SolveStats, SolverConfig, Status
from .simplex import Basis, SimplexEngine

ROUND_EVERY = 50  # nodes between rounding-heuristic attempts


def solve_lp(problem: MilpProblem, cfg: SolverConfig | None = None) -> Solution:
    """Solve the continuous relaxation of ``problem``."""
    cfg = cfg or SolverConfig()
    if problem.num_variables < 1:
        raise ValueError("problem has no variables")
    if cfg.backend == "highs":
        from .highs import solve_with_highs

        return solve_with_highs(problem, cfg, relax=True)
    problem.validate()
    start = time.perf_counter()
    arrays = problem.arrays()
    engine = SimplexEngine(arrays, cfg.feasibility_tol)
    res = engine.solve(arrays.lb, arrays.ub, iteration_limit=cfg.iteration_limit)
    stats = SolveStats(simplex_iterations=res.iterations, wall_time=time.perf_counter() - start)
    if res.status == "optimal":
        stats.gap = 0.0
        stats.best_bound = res.objective
        return Solution(Status.OPTIMAL, res.objective, res.x, stats)
    if res.status == "unbounded":
        return Solution(Status.UNBOUNDED, -math.inf, None, stats)
    if res.status == "infeasible":
        return Solution(Status.INFEASIBLE, math.nan, None, stats)
    return Solution(Status.NODE_LIMIT, math.nan, None, stats)


def solve_milp(problem: MilpProblem, cfg: SolverConfig | None = None) -> Solution:
    """Branch-and-bound over the binary variables of ``problem``.

    The search dives depth-first until a first incumbent exists, then switches to
    best-bound node selection. A node is pruned when its LP bound cannot improve
    the incumbent by more than ``relative_mip_gap * max(|incumbent|, 1)``; the
    same quantity is the stopping gap.
    """
    cfg = cfg or SolverConfig()
    if cfg.backend == "highs":
        from .highs import solve_with_highs

        return solve_with_highs(problem, cfg)
    problem.validate()
    return _BranchAndBound(problem, cfg).run()


@dataclass(order=True)
class _Node:
    bound: float
    seq: int
    fixes: tuple = field(compare=False)
    basis: Basis | None = field(compare=False, default=None)
    branch: tuple | None = field(compare=False, default=None)  # (var, direction, distance)


class _BranchAndBound:
    def __init__(self, problem: MilpProblem, cfg: SolverConfig):
        self.cfg = cfg
        self.arrays = problem.arrays()
        self.engine = SimplexEngine(self.arrays, cfg.feasibility_tol)
        self.binaries = np.flatnonzero(self.arrays.binary)
        self.seq = itertools.count()
        self.stats = SolveStats()
        self.incumbent: np.ndarray | None = None
        self.upper = math.inf
        n = problem.num_variables
        # pseudo-cost sums and counts, index 0 = down, 1 = up
        self.pc_sum = np.zeros((2, n))
        self.pc_cnt = np.zeros((2, n))

    # -- bookkeeping -------------------------------------------------------
    def _tolerance(self) -> float:
        if not math.isfinite(self.upper):
            return 0.0
        return self.cfg.relative_mip_gap * max(abs(self.upper), 1.0)

    def _bounds(self, fixes):
        lb = self.arrays.lb.copy()
        ub = self.arrays.ub.copy()
        for j, v in fixes:
            lb[j] = ub[j] = v
        return lb, ub

    def _lp(self, lb, ub, basis):
        res = self.engine.solve(lb, ub, basis, iteration_limit=self.cfg.iteration_limit)
        self.stats.simplex_iterations += res.iterations
        return res

    def _fractional(self, x):
        vals = x[self.binaries]
        dist = np.abs(vals - np.round(vals))
        mask = dist > self.cfg.integrality_tol
        return self.binaries[mask], vals[mask]

    def _accept(self, x, obj):
        if obj < self.upper:
            self.upper = obj
            self.incumbent = x.copy()

    def _choose(self, idx, vals):
        f = vals - np.floor(vals)
        if self.cfg.branching_rule == "most-fractional":
            score = np.minimum(f, 1.0 - f)
        else:
            known = self.pc_cnt > 0
            avg = np.array([
                (self.pc_sum[k][known[k]] / self.pc_cnt[k][known[k]]).mean() if known[k].any() else 1.0
                for k in (0, 1)
            ])
            down = np.where(self.pc_cnt[0, idx] > 0, self.pc_sum[0, idx] / np.maximum(self.pc_cnt[0, idx], 1), avg[0])
            up = np.where(self.pc_cnt[1, idx] > 0, self.pc_sum[1, idx] / np.maximum(self.pc_cnt[1, idx], 1), avg[1])
            score = np.maximum(down * f, 1e-6) * np.maximum(up * (1.0 - f), 1e-6)
        k = int(np.argmax(score))  # first maximum: lowest variable index wins ties
        return int(idx[k]), float(vals[k])

    def _round(self, x, fixes, basis):
        """Fix binaries to rounded LP values and solve the remaining LP."""
        vals = x[self.binaries]
        for trial in (np.round(vals), np.ceil(vals - self.cfg.integrality_tol)):
            lb, ub = self._bounds(fixes)
            lb[self.binaries] = trial
            ub[self.binaries] = trial
            res = self._lp(lb, ub, basis)
            if res.status == "optimal":
                self._accept(res.x, res.objective)
                return

    # -- search --------------------------------------------------------------
    def run(self) -> Solution:
        cfg = self.cfg
        start = time.perf_counter()
        stats = self.stats
        root_lb, root_ub = self.arrays.lb, self.arrays.ub
        res = self._lp(root_lb, root_ub, None)
        if res.status == "infeasible":
            return self._finish(Status.INFEASIBLE, start, math.nan)
        if res.status == "unbounded":
            return self._finish(Status.UNBOUNDED, start, -math.inf)
        if res.status != "optimal":
            return self._finish(Status.NODE_LIMIT, start, math.nan)

        idx, vals = self._fractional(res.x)
        if idx.size == 0:
            self._accept(res.x, res.objective)
            stats.incumbent_trace.append(self.upper)
            return self._finish(Status.OPTIMAL, start, res.objective)
        self._round(res.x, (), res.basis)

        stack: list[_Node] = []
        heap: list[_Node] = []
        self._branch(res, (), idx, vals, stack, heap)
        status = Status.OPTIMAL
        while stack or heap:
            lower = min([n.bound for n in stack] + ([heap[0].bound] if heap else []))
            if self.upper - lower <= self._tolerance():
                break
            if cfg.node_limit is not None and stats.nodes >= cfg.node_limit:
                status = Status.NODE_LIMIT
                break
            if cfg.time_limit_seconds is not None and time.perf_counter() - start > cfg.time_limit_seconds:
                status = Status.TIME_LIMIT
                break
            if self.incumbent is None and stack:
                node = stack.pop()
            else:
                if stack:
                    for n in stack:
                        heapq.heappush(heap, n)
                    stack.clear()
                node = heapq.heappop(heap)
            if node.bound >= self.upper - self._tolerance():
                continue
            stats.nodes += 1
            lb, ub = self._bounds(node.fixes)
            res = self._lp(lb, ub, node.basis)
            if res.status == "optimal" and node.branch is not None:
                j, direction, dist = node.branch
                gain = max(res.objective - node.bound, 0.0) / max(dist, 1e-9)
                self.pc_sum[direction, j] += gain
                self.pc_cnt[direction, j] += 1
            if res.status == "optimal" and res.objective < self.upper - self._tolerance():
                idx, vals = self._fractional(res.x)
                if idx.size == 0:
                    self._accept(res.x, res.objective)
                else:
                    if stats.nodes % ROUND_EVERY == 0 or (self.incumbent is None and stats.nodes % 10 == 0):
                        self._round(res.x, node.fixes, res.basis)
                    self._branch(res, node.fixes, idx, vals, stack, heap)
            stats.incumbent_trace.append(self.upper)

        if self.incumbent is None:
            if status == Status.OPTIMAL:
                return self._finish(Status.INFEASIBLE, start, math.nan)
            return self._finish(status, start, math.nan)
        open_bounds = [n.bound for n in stack] + [n.bound for n in heap]
        return self._finish(status, start, min([self.upper] + open_bounds))

    def _branch(self, res, fixes, idx, vals, stack, heap):
        j, v = self._choose(idx, vals)
        f = v - math.floor(v)
        down = _Node(res.objective, next(self.seq), fixes + ((j, 0.0),), res.basis, (j, 0, f))
        up = _Node(res.objective, next(self.seq), fixes + ((j, 1.0),), res.basis, (j, 1, 1.0 - f))
        if self.incumbent is None:
            # preferred child popped first
            first, second = (up, down) if f >= 0.5 else (down, up)
            stack.append(second)
            stack.append(first)
        else:
            heapq.heappush(heap, down)
            heapq.heappush(heap, up)

    def _finish(self, status, start, best_bound) -> Solution:
        stats = self.stats
        stats.wall_time = time.perf_counter() - start
        stats.best_bound = best_bound
        if self.incumbent is None:
            return Solution(status, math.nan if status != Status.UNBOUNDED else -math.inf, None, stats)
        if math.isfinite(best_bound):
            stats.gap = max(self.upper - best_bound, 0.0) / max(abs(self.upper), 1.0)
        return Solution(status, self.upper, self.incumbent, stats)
