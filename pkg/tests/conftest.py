import sys
from dataclasses import dataclass
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mwen.milp import SolverConfig, solve_milp  # noqa: E402
from mwen.model import build_networked, build_separate, extract_schedule  # noqa: E402
from mwen.scenario import builtin_case_study  # noqa: E402

# A tight gap so that objective comparisons between solves are meaningful.
EXACT = SolverConfig(backend="highs", relative_mip_gap=1e-9)

ACCEPTANCE_LINES: list[str] = []


@dataclass
class Solved:
    scenario: object
    problem: object
    index: object
    solution: object
    schedule: object


def solve(s, m=None, cfg=EXACT) -> Solved:
    problem, idx = build_networked(s) if m is None else build_separate(s, m)
    sol = solve_milp(problem, cfg)
    return Solved(s, problem, idx, sol, extract_schedule(sol, idx, s, cfg))


@pytest.fixture(scope="session")
def case():
    return builtin_case_study()


@pytest.fixture(scope="session")
def networked(case) -> Solved:
    return solve(case)


@pytest.fixture(scope="session")
def separate(case) -> list[Solved]:
    return [solve(case, m) for m in range(len(case.mwens))]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
