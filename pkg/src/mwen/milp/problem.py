"""Mixed-integer linear program container and solver result types."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse as sp

CONTINUOUS = "continuous"
BINARY = "binary"


class Status(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    GAP_LIMIT = "gap-limit"
    NODE_LIMIT = "node-limit"
    TIME_LIMIT = "time-limit"


@dataclass
class Variable:
    name: str
    lower: float = 0.0
    upper: float = math.inf
    integrality: str = CONTINUOUS

    @property
    def is_binary(self) -> bool:
        return self.integrality == BINARY


@dataclass
class Constraint:
    name: str
    coeffs: list[tuple[int, float]]
    sense: str  # "<=", "=", ">="
    rhs: float = 0.0


SENSES = ("<=", "=", ">=")


def normalize_coeffs(coeffs) -> list[tuple[int, float]]:
    """Merge duplicate indices, drop exact zeros, sort by variable index."""
    pairs = coeffs.items() if isinstance(coeffs, dict) else coeffs
    merged: dict[int, float] = {}
    for j, a in pairs:
        merged[int(j)] = merged.get(int(j), 0.0) + float(a)
    return [(j, a) for j, a in sorted(merged.items()) if a != 0.0]


class ProblemError(ValueError):
    pass


@dataclass
class MilpProblem:
    """A minimization problem ``min c.x + k`` over linear rows and variable bounds.

    Coefficients are sparse ``(variable index, value)`` pairs, merged and sorted
    by index when a row is added.
    """

    name: str = "problem"
    variables: list[Variable] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    objective: list[tuple[int, float]] = field(default_factory=list)
    objective_constant: float = 0.0

    def __post_init__(self):
        self._names = {v.name: i for i, v in enumerate(self.variables)}

    def add_variable(self, name, lower=0.0, upper=math.inf, integrality=CONTINUOUS) -> int:
        if name in self._names:
            raise ProblemError(f"duplicate variable name {name!r}")
        if integrality == BINARY and (lower < 0.0 or upper > 1.0):
            raise ProblemError(f"binary variable {name!r} has bounds outside [0, 1]")
        self._names[name] = len(self.variables)
        self.variables.append(Variable(name, float(lower), float(upper), integrality))
        return len(self.variables) - 1

    def add_constraint(self, name, coeffs, sense, rhs=0.0) -> int:
        if sense not in SENSES:
            raise ProblemError(f"row {name!r}: unknown sense {sense!r}")
        pairs = normalize_coeffs(coeffs)
        n = len(self.variables)
        for j, _ in pairs:
            if not 0 <= j < n:
                raise ProblemError(f"row {name!r} references unknown variable {j}")
        self.constraints.append(Constraint(name, pairs, sense, float(rhs)))
        return len(self.constraints) - 1

    def set_objective(self, coeffs, constant=0.0):
        self.objective = normalize_coeffs(coeffs)
        self.objective_constant = float(constant)

    def index(self, name: str) -> int:
        return self._names[name]

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    @property
    def num_binaries(self) -> int:
        return sum(v.is_binary for v in self.variables)

    def validate(self) -> None:
        seen = set()
        for v in self.variables:
            if v.name in seen:
                raise ProblemError(f"duplicate variable name {v.name!r}")
            seen.add(v.name)
            if v.is_binary and (v.lower < 0.0 or v.upper > 1.0):
                raise ProblemError(f"binary variable {v.name!r} has bounds outside [0, 1]")
        n = len(self.variables)
        for row in self.constraints:
            if row.sense not in SENSES:
                raise ProblemError(f"row {row.name!r}: unknown sense {row.sense!r}")
            for j, _ in row.coeffs:
                if not 0 <= j < n:
                    raise ProblemError(f"row {row.name!r} references unknown variable {j}")
        for j, _ in self.objective:
            if not 0 <= j < n:
                raise ProblemError(f"objective references unknown variable {j}")

    def arrays(self) -> "ProblemArrays":
        """Dense bounds/cost vectors and a CSR row matrix."""
        n, m = self.num_variables, self.num_constraints
        c = np.zeros(n)
        for j, a in self.objective:
            c[j] += a
        rows, cols, vals = [], [], []
        lo = np.empty(m)
        hi = np.empty(m)
        for i, row in enumerate(self.constraints):
            for j, a in row.coeffs:
                rows.append(i)
                cols.append(j)
                vals.append(a)
            lo[i] = row.rhs if row.sense in ("=", ">=") else -np.inf
            hi[i] = row.rhs if row.sense in ("=", "<=") else np.inf
        A = sp.csr_matrix((vals, (rows, cols)), shape=(m, n))
        A.sum_duplicates()
        lb = np.array([v.lower for v in self.variables], dtype=float)
        ub = np.array([v.upper for v in self.variables], dtype=float)
        binary = np.array([v.is_binary for v in self.variables], dtype=bool)
        return ProblemArrays(c, A, lo, hi, lb, ub, binary, self.objective_constant)

    def relaxed(self) -> "MilpProblem":
        """Copy with every binary turned continuous on the same bounds."""
        return MilpProblem(
            self.name,
            [Variable(v.name, v.lower, v.upper, CONTINUOUS) for v in self.variables],
            list(self.constraints),
            list(self.objective),
            self.objective_constant,
        )

    def __eq__(self, other):
        if not isinstance(other, MilpProblem):
            return NotImplemented
        def rows(p):
            return [(r.name, normalize_coeffs(r.coeffs), r.sense, r.rhs) for r in p.constraints]

        return (
            self.name == other.name
            and self.variables == other.variables
            and rows(self) == rows(other)
            and normalize_coeffs(self.objective) == normalize_coeffs(other.objective)
            and self.objective_constant == other.objective_constant
        )


@dataclass
class ProblemArrays:
    c: np.ndarray
    A: sp.csr_matrix
    row_lo: np.ndarray
    row_hi: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    binary: np.ndarray
    constant: float = 0.0


@dataclass
class SolverConfig:
    feasibility_tol: float = 1e-7
    integrality_tol: float = 1e-6
    relative_mip_gap: float = 1e-4
    node_limit: int | None = None
    time_limit_seconds: float | None = None
    branching_rule: str = "most-fractional"  # or "pseudo-cost"
    backend: str = "native"  # or "highs"
    iteration_limit: int = 1_000_000

    def __post_init__(self):
        for name in ("feasibility_tol", "integrality_tol", "relative_mip_gap"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.branching_rule not in ("most-fractional", "pseudo-cost"):
            raise ValueError(f"unknown branching rule {self.branching_rule!r}")
        if self.backend not in ("native", "highs"):
            raise ValueError(f"unknown backend {self.backend!r}")


@dataclass
class SolveStats:
    nodes: int = 0
    simplex_iterations: int = 0
    wall_time: float = 0.0
    gap: float = math.nan
    best_bound: float = math.nan
    incumbent_trace: list[float] = field(default_factory=list)


@dataclass
class Solution:
    status: Status
    objective_value: float = math.nan
    values: np.ndarray | None = None
    stats: SolveStats = field(default_factory=SolveStats)

    @property
    def has_incumbent(self) -> bool:
        return self.values is not None

    def value(self, problem: MilpProblem, name: str) -> float:
        return float(self.values[problem.index(name)])


def max_violation(problem: MilpProblem, x) -> float:
    """Largest bound or row violation of ``x``, evaluated row by row."""
    worst = 0.0
    for v, xv in zip(problem.variables, x):
        worst = max(worst, v.lower - xv, xv - v.upper)
    for row in problem.constraints:
        act = math.fsum(a * x[j] for j, a in row.coeffs)
        if row.sense == "<=":
            worst = max(worst, act - row.rhs)
        elif row.sense == ">=":
            worst = max(worst, row.rhs - act)
        else:
            worst = max(worst, abs(act - row.rhs))
    return worst
