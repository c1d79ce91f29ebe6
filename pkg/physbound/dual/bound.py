"""Certified lower bounds from the dual semidefinite program."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg as sla

from physbound.config import SolverConfig
from physbound.dual.backends import ConicSolution, SolverStatus, get_backend
from physbound.dual.lagrangian import (
    DualMode,
    DualPoint,
    QuadraticCoefficients,
    assemble_quadratic,
    eval_dual,
)
from physbound.dual.program import ConicProgram, build_dual_sdp
from physbound.errors import UnverifiedProjectorsError
from physbound.problem.models import FloatArray, PhysicsProblem, QuadraticObjective
from physbound.projectors.models import ProjectorSet

logger = logging.getLogger(__name__)

__all__ = ["BoundReport", "SolverStatus", "schur_block", "solve_bound"]


@dataclass(frozen=True)
class BoundReport:
    d_star: float
    dual_point: DualPoint
    solver_status: SolverStatus
    schur_slack: float
    p_star: float | None = None
    gap: float | None = None
    # the backend's own optimal value, kept apart from the certified d_star
    solver_objective: float = math.nan
    backoff: float = 1.0

    def with_oracle(self, p_star: float) -> BoundReport:
        gap = p_star - self.d_star if math.isfinite(p_star) and math.isfinite(self.d_star) else None
        return replace(self, p_star=p_star, gap=gap)


def schur_block(coeffs: QuadraticCoefficients, s: float) -> FloatArray:
    """[[T, u], [u^T, s]]."""
    t_hat, u_hat, _ = coeffs
    n = u_hat.size
    block = np.empty((n + 1, n + 1))
    block[:n, :n] = t_hat
    block[:n, n] = u_hat
    block[n, :n] = u_hat
    block[n, n] = s
    return block


def _min_eig(a: FloatArray) -> float:
    return float(sla.eigvalsh(a)[0])


def _certify(
    dp: DualPoint,
    problem: PhysicsProblem,
    ps: ProjectorSet,
    obj: QuadraticObjective,
    cfg: SolverConfig,
) -> tuple[DualPoint, float, float]:
    """Return (point, g(point), beta), shrinking toward zero while g = -inf."""
    g = eval_dual(dp, problem, ps, obj, cfg.tolerances)
    if math.isfinite(g):
        return dp, g, 1.0
    for beta in cfg.backoff:
        shrunk = dp.scaled(beta)
        g = eval_dual(shrunk, problem, ps, obj, cfg.tolerances)
        if math.isfinite(g):
            logger.warning("dual point certified after back-off by %.1e", 1.0 - beta)
            return shrunk, g, beta
    zero = DualPoint.zeros(ps, dp.mode)
    logger.warning("back-off failed; falling back to the zero dual point")
    return zero, eval_dual(zero, problem, ps, obj, cfg.tolerances), 0.0


def _fallback(
    solution: ConicSolution,
    problem: PhysicsProblem,
    ps: ProjectorSet,
    obj: QuadraticObjective,
    mode: DualMode,
    cfg: SolverConfig,
) -> BoundReport:
    zero = DualPoint.zeros(ps, mode)
    g = eval_dual(zero, problem, ps, obj, cfg.tolerances)
    return BoundReport(
        d_star=g,
        dual_point=zero,
        solver_status=SolverStatus.NUMERICAL_TROUBLE,
        schur_slack=math.nan,
        solver_objective=solution.objective,
        backoff=0.0,
    )


def solve_bound(
    problem: PhysicsProblem,
    ps: ProjectorSet,
    obj: QuadraticObjective,
    mode: DualMode | None = None,
    solver_config: SolverConfig | None = None,
    program: ConicProgram | None = None,
) -> BoundReport:
    """Solve the dual program and certify its value through ``eval_dual``.

    The reported ``d_star`` is always g at the returned dual point. Solver
    failures degrade the status and fall back to a certified point; they
    never raise.
    """
    if not ps.verified:
        raise UnverifiedProjectorsError(
            f"{ps.method.value} projector set failed verification "
            f"(worst residual {ps.residuals.worst():.3e})"
        )
    cfg = solver_config or SolverConfig()
    mode = mode or DualMode.for_domain(problem.domain)
    program = program or build_dual_sdp(problem, ps, obj, mode)
    solution = get_backend(cfg).solve(program, cfg)
    status = solution.status

    if status in (SolverStatus.UNBOUNDED, SolverStatus.INFEASIBLE):
        logger.warning(
            "solver reports the dual program %s; keeping the certified zero point",
            status.value,
        )
        return _fallback(solution, problem, ps, obj, mode, cfg)
    if solution.x is None:
        logger.warning("solver returned no point (status %s)", status.value)
        return _fallback(solution, problem, ps, obj, mode, cfg)

    raw, s = program.decode(solution.x)
    dp, g, beta = _certify(raw.project_psd(), problem, ps, obj, cfg)
    if beta == 0.0:
        status = SolverStatus.NUMERICAL_TROUBLE

    coeffs = assemble_quadratic(dp, problem, ps, obj)
    if beta != 1.0 and math.isfinite(g):
        s = coeffs.v_hat - g
    slack = _min_eig(schur_block(coeffs, s))

    tol = cfg.tolerances.certificate
    if (
        status is SolverStatus.OPTIMAL
        and math.isfinite(solution.objective)
        and abs(g - solution.objective) > tol * (1.0 + abs(g))
    ):
        logger.warning(
            "certified value %.10g disagrees with solver objective %.10g",
            g, solution.objective,
        )
        status = SolverStatus.NUMERICAL_TROUBLE
    if status is not SolverStatus.OPTIMAL:
        logger.warning("bound finished with status %s", status.value)
    logger.debug("d_star %.12g (solver %.12g), schur slack %.3e", g, solution.objective, slack)

    return BoundReport(
        d_star=g,
        dual_point=dp,
        solver_status=status,
        schur_slack=slack,
        solver_objective=solution.objective,
        backoff=beta,
    )
