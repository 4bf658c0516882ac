"""Self-contained MILP toolkit: problem container, simplex, branch-and-bound, MPS I/O."""

from .branch import solve_lp, solve_milp
from .mps import MpsError, export_mps, parse_mps, sanitize_names
from .problem import (
    BINARY,
    CONTINUOUS,
    Constraint,
    MilpProblem,
    ProblemError,
    Solution,
    SolverConfig,
    SolveStats,
    Status,
    Variable,
    max_violation,
)

__all__ = [
    "BINARY", "CONTINUOUS", "Constraint", "MilpProblem", "MpsError", "ProblemError",
    "Solution", "SolverConfig", "SolveStats", "Status", "Variable", "export_mps",
    "max_violation", "parse_mps", "sanitize_names", "solve_lp", "solve_milp",
]
