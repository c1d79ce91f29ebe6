"""Gradient descent-ascent on the Lagrangian L(z, N, nu).

Simultaneous updates with fixed steps from z = 0 (or a seeded random start),
N = 0 and nu = 0:

    z   <- z - step_primal * dL/dz
    N_i <- clip(N_i + step_dual * dL/dN_i)   (eigenvalue clipping, interval only)
    nu  <- nu + step_dual * dL/dnu
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla
from numpy.typing import ArrayLike

from physbound.config import SaddleConfig
from physbound.dual.lagrangian import (
    DualMode,
    DualPoint,
    assemble_quadratic,
    eval_dual,
    eval_lagrangian,
)
from physbound.problem.models import FloatArray, PhysicsProblem, QuadraticObjective
from physbound.projectors.models import ProjectorSet
from physbound.sets.membership import term_vectors, violation_for

logger = logging.getLogger(__name__)


class SaddleGradients(NamedTuple):
    grad_z: FloatArray
    grad_n: tuple[FloatArray, ...]
    grad_nu: FloatArray


@dataclass(frozen=True)
class SaddleResult:
    z_best: FloatArray
    # last dual iterate
    dp_best: DualPoint
    l_trace: tuple[float, ...]
    diverged: bool
    # eval_dual(dp_best), -inf when not finite
    g_final: float
    # iterate with the largest finite dual value; zero point and -inf if none
    dp_incumbent: DualPoint
    g_incumbent: float
    iterations: int


def gradients(
    z: ArrayLike,
    dp: DualPoint,
    problem: PhysicsProblem,
    ps: ProjectorSet,
    obj: QuadraticObjective,
) -> SaddleGradients:
    """Partial derivatives of L at (z, N, nu).

    dL/dz = 2 T z + 2 u, dL/dN_i = x_i x_i^T - y_i y_i^T and
    dL/dnu = P_0 A_0 z - P_0 b.
    """
    z = np.asarray(z, dtype=np.float64)
    t_hat, u_hat, _ = assemble_quadratic(dp, problem, ps, obj)
    grad_z = 2.0 * (t_hat @ z) + 2.0 * u_hat
    grad_n = tuple(np.outer(x, x) - np.outer(y, y) for x, y in term_vectors(z, problem, ps))
    if ps.m0:
        grad_nu = ps.p0 @ (problem.a0 @ z) - ps.p0 @ problem.b
    else:
        grad_nu = np.zeros(0)
    return SaddleGradients(grad_z=grad_z, grad_n=grad_n, grad_nu=grad_nu)


def _clip_psd(n: FloatArray, tol: float) -> FloatArray:
    w, vecs = sla.eigh(n)
    w = np.where(w < tol, 0.0, w)
    return (vecs * w) @ vecs.T


def _primal_score(
    z: FloatArray,
    problem: PhysicsProblem,
    ps: ProjectorSet,
    obj: QuadraticObjective,
    penalty: float,
) -> float:
    viol = violation_for(z, problem, ps)
    return obj(z) + penalty * (sum(viol.per_term) + viol.affine_residual)


def run_saddle(
    problem: PhysicsProblem,
    ps: ProjectorSet,
    obj: QuadraticObjective,
    cfg: SaddleConfig | None = None,
) -> SaddleResult:
    cfg = cfg or SaddleConfig()
    mode = DualMode.for_domain(problem.domain)
    rng = np.random.default_rng(cfg.seed)
    if cfg.init_scale > 0.0:
        z = cfg.init_scale * rng.standard_normal(problem.n)
    else:
        z = np.zeros(problem.n)
    dp = DualPoint.zeros(ps, mode)

    trace: list[float] = []
    z_best, score_best = z.copy(), math.inf
    dp_incumbent, g_incumbent = dp, -math.inf
    diverged = False
    it = 0

    for it in range(1, cfg.iterations + 1):
        lval = eval_lagrangian(z, dp, problem, ps, obj)
        trace.append(lval)
        if not math.isfinite(lval) or abs(lval) > cfg.divergence_limit:
            diverged = True
            logger.warning("saddle iteration diverged at step %d (L = %.3e)", it, lval)
            break

        score = _primal_score(z, problem, ps, obj, cfg.penalty)
        if score < score_best:
            z_best, score_best = z.copy(), score
        g = eval_dual(dp, problem, ps, obj)
        if math.isfinite(g) and g > g_incumbent:
            dp_incumbent, g_incumbent = dp, g

        grads = gradients(z, dp, problem, ps, obj)
        z = z - cfg.step_primal * grads.grad_z
        blocks = [n + cfg.step_dual * gn for n, gn in zip(dp.n_blocks, grads.grad_n)]
        if mode is DualMode.INTERVAL_PSD:
            blocks = [_clip_psd(n, cfg.psd_projection_tol) for n in blocks]
        dp = DualPoint(
            n_blocks=tuple(blocks), nu=dp.nu + cfg.step_dual * grads.grad_nu, mode=mode
        )

    finite = all(np.all(np.isfinite(n)) for n in dp.n_blocks) and np.all(np.isfinite(dp.nu))
    g_final = eval_dual(dp, problem, ps, obj) if finite else -math.inf
    if not math.isfinite(g_final):
        g_final = -math.inf
    elif g_final > g_incumbent:
        dp_incumbent, g_incumbent = dp, g_final
    logger.debug(
        "saddle: %d iterations, best primal score %.6g, final dual %.6g, best dual %.6g",
        it, score_best, g_final, g_incumbent,
    )
    return SaddleResult(
        z_best=z_best,
        dp_best=dp,
        l_trace=tuple(trace),
        diverged=diverged,
        g_final=g_final,
        dp_incumbent=dp_incumbent,
        g_incumbent=g_incumbent,
        iterations=it,
    )
