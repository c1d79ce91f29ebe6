import numpy as np
import pytest

from conftest import instance, scalar_problem, two_case_problem
from physbound.errors import DimensionError
from physbound.problem.models import FactoredTerm, PhysicsProblem, QuadraticObjective
from physbound.problem.physics import (
    assemble_physics,
    numerical_rank,
    solve_field,
    validate_objective,
    validate_problem,
)


@pytest.mark.parametrize("kind", ["multi_scenario_diag", "rank_one_loads", "helmholtz_1d"])
def test_generated_instances_validate(kind):
    assert validate_problem(instance(kind, 6, 3, seed=1).problem) == []


def test_validate_reports_row_mismatch():
    term = FactoredTerm(u=np.ones((3, 1)), v=np.ones((2, 1)))
    p = PhysicsProblem(a0=np.eye(2), terms=(term,), b=np.zeros(2))
    report = validate_problem(p)
    assert any("terms[1].u: expected 2 rows" in msg for msg in report)


def test_validate_reports_dependent_columns():
    u = np.array([[1.0, 2.0], [1.0, 2.0], [0.0, 0.0]])
    p = PhysicsProblem(a0=np.eye(3), terms=(FactoredTerm(u=u, v=np.ones((3, 2))),), b=np.ones(3))
    report = validate_problem(p)
    assert len(report) == 1
    assert "linearly independent" in report[0]


def test_validate_reports_b_length_and_missing_terms():
    p = PhysicsProblem(a0=np.eye(2), terms=(), b=np.zeros(3))
    report = validate_problem(p)
    assert any(msg.startswith("b:") for msg in report)
    assert any(msg.startswith("terms:") for msg in report)


def test_assemble_physics_zero_theta_is_a0():
    p = instance("helmholtz_1d", 5, 2, seed=0).problem
    np.testing.assert_array_equal(assemble_physics(p, np.zeros(2)), p.a0)


def test_assemble_physics_matches_dense_sum(rng):
    p = instance("rank_one_loads", 5, 3, seed=4).problem
    theta = rng.uniform(-1, 1, 3)
    expected = p.a0 + sum(t * p.dense_term(i) for i, t in enumerate(theta, start=1))
    np.testing.assert_allclose(assemble_physics(p, theta), expected, atol=1e-14)


def test_assemble_physics_is_affine_in_theta(rng):
    p = instance("helmholtz_1d", 6, 3, seed=2).problem
    for _ in range(10):
        theta, other = rng.uniform(-1, 1, (2, 3))
        lam = rng.uniform()
        mixed = assemble_physics(p, lam * theta + (1.0 - lam) * other)
        combined = lam * assemble_physics(p, theta) + (1.0 - lam) * assemble_physics(p, other)
        np.testing.assert_allclose(mixed, combined, rtol=1e-12, atol=1e-12)


def test_assemble_physics_rejects_wrong_length():
    with pytest.raises(DimensionError):
        assemble_physics(scalar_problem(), [0.0, 1.0])


def test_solve_field_scalar():
    sol = solve_field(scalar_problem(), [1.0])
    assert sol.solvable
    assert sol.z[0] == pytest.approx(1.0 / 1.5, abs=1e-15)
    assert sol.residual <= 1e-15


def test_solve_field_flags_singular_system():
    p = two_case_problem()
    assert solve_field(p, [1.0]).solvable
    assert not solve_field(p, [-1.0]).solvable


def test_numerical_rank():
    assert numerical_rank(np.zeros((3, 3)), 1e-10) == 0
    assert numerical_rank(np.diag([1.0, 1e-12, 1.0]), 1e-10) == 2


def test_objective_is_symmetrized_and_evaluates():
    obj = QuadraticObjective(qmat=[[1.0, 2.0], [0.0, 1.0]], qvec=[1.0, 0.0], r=3.0)
    np.testing.assert_array_equal(obj.qmat, [[1.0, 1.0], [1.0, 1.0]])
    assert obj([1.0, 1.0]) == pytest.approx(4.0 + 2.0 + 3.0)


def test_validate_objective():
    assert validate_objective(QuadraticObjective.squared_distance([1.0, 0.0]), 2) == []
    short = QuadraticObjective(qmat=np.eye(2), qvec=np.zeros(2))
    assert validate_objective(short, 3)[0].startswith("objective: expected")
    bad = QuadraticObjective(qmat=np.eye(2), qvec=[np.nan, 0.0], r=0.0)
    assert validate_objective(bad, 2) == ["objective: non-finite entries"]
    assert validate_objective(QuadraticObjective(qmat=np.eye(1), qvec=[0.0], r=np.inf), 1)


def test_squared_distance_objective():
    obj = QuadraticObjective.squared_distance([1.0, -2.0])
    assert obj([1.0, -2.0]) == pytest.approx(0.0, abs=1e-14)
    assert obj([0.0, 0.0]) == pytest.approx(5.0)


def test_problem_arrays_are_read_only():
    p = scalar_problem()
    with pytest.raises(ValueError):
        p.a0[0, 0] = 2.0
