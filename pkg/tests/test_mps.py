import math

import numpy as np
import pytest

from mwen.milp import BINARY, MilpProblem, MpsError, export_mps, parse_mps, sanitize_names
from mwen.model import build_networked, build_separate
from oracles import random_milp


def toy():
    p = MilpProblem("toy")
    x = p.add_variable("x", -2.5, 7.0)
    y = p.add_variable("y", -math.inf, math.inf)
    a = p.add_variable("a", 0, 1, BINARY)
    b = p.add_variable("b", 0, 1, BINARY)
    z = p.add_variable("z", 3.0, 3.0)
    p.add_constraint("c1", {x: 1.5, y: -1, a: 2}, "<=", 4.25)
    p.add_constraint("c2", {y: 1, b: 0.1}, ">=", -1)
    p.add_constraint("c3", {x: 1, z: 1, a: 1, b: 1}, "=", 0.3)
    p.set_objective({x: 1, a: -2, b: 0.7}, constant=1.5)
    return p


def test_single_row_problem_has_one_row_besides_objective():
    p = MilpProblem("one")
    x = p.add_variable("x")
    p.add_constraint("r", {x: 1}, "<=", 1)
    text = export_mps(p)
    rows = text.split("ROWS\n")[1].split("COLUMNS\n")[0].splitlines()
    assert len(rows) == 2 and rows[0].split() == ["N", "OBJ"]


def test_two_binaries_give_one_marker_pair():
    p = MilpProblem("two")
    a = p.add_variable("a", 0, 1, BINARY)
    b = p.add_variable("b", 0, 1, BINARY)
    p.add_constraint("r", {a: 1, b: 1}, "<=", 1)
    text = export_mps(p)
    assert text.count("'INTORG'") == 1 and text.count("'INTEND'") == 1


def test_toy_round_trip():
    p = toy()
    assert parse_mps(export_mps(p)) == p


def test_missing_rhs_section_means_zero():
    text = "NAME t\nROWS\n N OBJ\n L r1\n G r2\nCOLUMNS\n    x r1 1.0\n    x r2 2.0\n    x OBJ 1.0\nENDATA\n"
    p = parse_mps(text)
    assert [r.rhs for r in p.constraints] == [0.0, 0.0]
    assert [r.sense for r in p.constraints] == ["<=", ">="]


def test_undeclared_row_is_named():
    text = "NAME t\nROWS\n N OBJ\n L r1\nCOLUMNS\n    x ghost 1.0\nENDATA\n"
    with pytest.raises(MpsError, match="ghost"):
        parse_mps(text)


def test_bad_section_order():
    text = "NAME t\nCOLUMNS\n    x OBJ 1.0\nROWS\n N OBJ\nENDATA\n"
    with pytest.raises(MpsError):
        parse_mps(text)


def test_names_are_sanitized_and_mapped():
    p = MilpProblem("weird name")
    x = p.add_variable("x with space")
    y = p.add_variable("x_with_space")
    p.add_constraint("$row", {x: 1, y: 1}, "<=", 1)
    cols, rows, names = sanitize_names(p)
    assert len(set(cols)) == 2 and all(" " not in c for c in cols)
    assert not rows[0].startswith("$")
    q = parse_mps(export_mps(p), names)
    assert q.variables == p.variables and [r.name for r in q.constraints] == ["$row"]


@pytest.mark.parametrize("seed", range(20))
def test_random_round_trip(seed):
    p = random_milp(np.random.default_rng(seed))
    assert parse_mps(export_mps(p)) == p


def test_nexus_model_round_trip(case):
    p, _ = build_networked(case)
    text = export_mps(p)
    assert parse_mps(text) == p
    assert "eq04.up[m=0,g=0,t=7]" in text


def test_separate_mwen4_export_has_no_generator_columns(case):
    p, _ = build_separate(case, 3)
    cols = set(line.split()[0] for line in export_mps(p).split("COLUMNS\n")[1].split("RHS\n")[0].splitlines())
    assert not any(c.startswith(("P_G", "u_G", "v_G")) for c in cols)


def test_external_solver_accepts_export(tmp_path):
    pytest.importorskip("highspy")
    from mwen.milp import SolverConfig, solve_milp
    from mwen.milp.highs import solve_mps_file

    p = random_milp(np.random.default_rng(3))
    path = tmp_path / "r.mps"
    path.write_text(export_mps(p))
    status, obj = solve_mps_file(path, mip_gap=1e-9)
    ours = solve_milp(p, SolverConfig(relative_mip_gap=1e-9))
    if status == "Optimal":
        assert obj == pytest.approx(ours.objective_value, abs=1e-6)
    else:
        assert not ours.has_incumbent
