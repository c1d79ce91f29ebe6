import math

import numpy as np
import pytest

from conftest import SCALAR_OPTIMUM, instance, scalar_objective, scalar_problem
from physbound.config import SolverConfig
from physbound.dual.backends import ConicSolution, SolverStatus, register_backend
from physbound.dual.bound import solve_bound
from physbound.dual.lagrangian import DualMode, DualPoint, eval_dual
from physbound.errors import ConfigError, UnverifiedProjectorsError
from physbound.problem.models import Domain, QuadraticObjective
from physbound.projectors.construction import construct_projectors
from physbound.projectors.models import ProjectorMethod


class _FixedBackend:
    """Returns a canned solution regardless of the program."""

    name = "fixed"

    def __init__(self, solution_fn):
        self.solution_fn = solution_fn

    def solve(self, program, cfg):
        return self.solution_fn(program)


def _with_backend(name, solution_fn) -> SolverConfig:
    register_backend(name, lambda: _FixedBackend(solution_fn))
    return SolverConfig(backend=name)


@pytest.mark.solver
def test_scalar_bound_is_tight(scalar):
    problem, ps, obj = scalar
    report = solve_bound(problem, ps, obj, DualMode.INTERVAL_PSD)
    assert report.solver_status is SolverStatus.OPTIMAL
    assert report.d_star == pytest.approx(SCALAR_OPTIMUM, abs=1e-4)
    assert report.dual_point.n_blocks[0][0, 0] == pytest.approx(4.0 / 3.0, abs=1e-3)
    assert report.schur_slack >= -1e-6


@pytest.mark.solver
def test_zero_objective_bound_is_zero(multi):
    problem, ps, _ = multi
    report = solve_bound(problem, ps, QuadraticObjective.zero(problem.n))
    assert report.d_star == pytest.approx(0.0, abs=1e-6)


@pytest.mark.solver
def test_certificate_reevaluates(multi):
    problem, ps, obj = multi
    report = solve_bound(problem, ps, obj)
    g = eval_dual(report.dual_point, problem, ps, obj)
    assert abs(g - report.d_star) <= 1e-5 * (1.0 + abs(report.d_star))
    assert report.dual_point.is_feasible()
    assert abs(report.solver_objective - report.d_star) <= 1e-5 * (1.0 + abs(report.d_star))


@pytest.mark.solver
def test_boolean_mode_dominates_interval(multi):
    problem, ps, obj = multi
    interval = solve_bound(problem, ps, obj, DualMode.INTERVAL_PSD)
    boolean = solve_bound(problem, ps, obj, DualMode.BOOLEAN_SYMMETRIC)
    assert boolean.d_star >= interval.d_star - 1e-6


@pytest.mark.solver
def test_mode_defaults_to_problem_domain():
    inst = instance("helmholtz_1d", 5, 2, seed=2, domain=Domain.BOOLEAN)
    ps = construct_projectors(inst.problem)
    report = solve_bound(inst.problem, ps, inst.objective)
    assert report.dual_point.mode is DualMode.BOOLEAN_SYMMETRIC


def test_unverified_projectors_are_refused(rank_one_instance):
    p = rank_one_instance.problem
    ps = construct_projectors(p, ProjectorMethod.QR_SHORTCUT)
    with pytest.raises(UnverifiedProjectorsError):
        solve_bound(p, ps, rank_one_instance.objective)


def test_unknown_backend():
    problem = scalar_problem()
    ps = construct_projectors(problem)
    with pytest.raises(ConfigError):
        solve_bound(problem, ps, scalar_objective(), solver_config=SolverConfig(backend="nope"))


def test_solver_failure_falls_back_to_zero_point(scalar):
    problem, ps, obj = scalar
    cfg = _with_backend(
        "failing", lambda prog: ConicSolution(None, SolverStatus.NUMERICAL_TROUBLE, math.nan)
    )
    report = solve_bound(problem, ps, obj, solver_config=cfg)
    assert report.solver_status is SolverStatus.NUMERICAL_TROUBLE
    # g at the zero point: inf z^2 = 0
    assert report.d_star == 0.0
    assert report.dual_point.n_blocks[0][0, 0] == 0.0


@pytest.mark.parametrize(
    ("status", "objective"),
    [(SolverStatus.UNBOUNDED, math.inf), (SolverStatus.INFEASIBLE, -math.inf)],
)
def test_unverified_solver_claims_fall_back_to_zero_point(scalar, status, objective):
    problem, ps, obj = scalar
    cfg = _with_backend(f"claims-{status.value}", lambda prog: ConicSolution(None, status, objective))
    report = solve_bound(problem, ps, obj, solver_config=cfg)
    assert math.isfinite(report.d_star)
    assert report.d_star == eval_dual(report.dual_point, problem, ps, obj)
    assert report.d_star <= SCALAR_OPTIMUM
    assert report.solver_status is SolverStatus.NUMERICAL_TROUBLE
    assert report.solver_objective == objective


def test_backoff_rescues_marginally_infeasible_point():
    # Boolean scalar: T = 1 + 0.75 N, so N slightly below -4/3 is infeasible
    problem = scalar_problem(Domain.BOOLEAN)
    ps = construct_projectors(problem)
    obj = scalar_objective()
    n_bad = -(4.0 / 3.0 + 1e-9)

    def solution(prog):
        dp = DualPoint(n_blocks=(np.array([[n_bad]]),), nu=np.zeros(0), mode=prog.mode)
        return ConicSolution(prog.encode(dp, 0.0), SolverStatus.OPTIMAL, 0.0)

    cfg = _with_backend("marginal", solution)
    assert eval_dual(
        DualPoint(n_blocks=(np.array([[n_bad]]),), nu=np.zeros(0), mode=DualMode.BOOLEAN_SYMMETRIC),
        problem, ps, obj,
    ) == -math.inf
    report = solve_bound(problem, ps, obj, solver_config=cfg)
    assert report.backoff == pytest.approx(1.0 - 1e-9)
    assert math.isfinite(report.d_star)
    # the certified value is far below the claimed one
    assert report.solver_status is SolverStatus.NUMERICAL_TROUBLE


def test_backoff_exhausted_uses_zero_point():
    problem = scalar_problem(Domain.BOOLEAN)
    ps = construct_projectors(problem)

    def solution(prog):
        dp = DualPoint(n_blocks=(np.array([[-10.0]]),), nu=np.zeros(0), mode=prog.mode)
        return ConicSolution(prog.encode(dp, 0.0), SolverStatus.OPTIMAL, 1.0)

    report = solve_bound(problem, ps, scalar_objective(), solver_config=_with_backend("bad", solution))
    assert report.backoff == 0.0
    assert report.d_star == 0.0
    assert report.solver_status is SolverStatus.NUMERICAL_TROUBLE
