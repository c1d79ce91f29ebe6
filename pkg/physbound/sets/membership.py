"""Membership in the sets S_i (interval) and their Boolean counterparts.

For a field z let x_i = P_i (b - A_0 z) and y_i = P_i A_i z. The family of
inequalities x_i^T N x_i <= y_i^T N y_i over all PSD N reduces to the sign of
lambda_max(x_i x_i^T - y_i y_i^T): the supremum over unit-norm PSD N is
attained at a rank-one eigenvector matrix.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla
from numpy.typing import ArrayLike

from physbound.config import DEFAULT_TOLERANCES, Tolerances
from physbound.problem.models import Domain, FloatArray, PhysicsProblem
from physbound.problem.physics import assemble_physics
from physbound.projectors.models import ProjectorSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SetViolation:
    per_term: tuple[float, ...]
    affine_residual: float

    def worst(self) -> float:
        return max(self.per_term + (self.affine_residual,))

    def is_member(self, tol: float) -> bool:
        return self.worst() <= tol


class RecoveredTheta(NamedTuple):
    theta: FloatArray
    residual: float


def membership_tolerance(
    problem: PhysicsProblem, z: ArrayLike, tol: Tolerances = DEFAULT_TOLERANCES
) -> float:
    """Scale-free zero threshold tol * (1 + ||b||^2 + ||z||^2)."""
    z = np.asarray(z, dtype=np.float64)
    return tol.membership * (1.0 + float(problem.b @ problem.b) + float(z @ z))


def term_vectors(
    z: ArrayLike, problem: PhysicsProblem, ps: ProjectorSet
) -> list[tuple[FloatArray, FloatArray]]:
    """(x_i, y_i) = (P_i (b - A_0 z), P_i A_i z) for i = 1..d."""
    z = np.asarray(z, dtype=np.float64)
    rhs = problem.b - problem.a0 @ z
    pairs = []
    for p, term in zip(ps.p_blocks[1:], problem.terms):
        pairs.append((p @ rhs, p @ term.apply(z)))
    return pairs


def _affine_residual(z: FloatArray, problem: PhysicsProblem, ps: ProjectorSet) -> float:
    if ps.m0 == 0:
        return 0.0
    return float(np.linalg.norm(ps.p0 @ (problem.a0 @ z) - ps.p0 @ problem.b))


def _form_eigenvalues(x: FloatArray, y: FloatArray) -> FloatArray:
    return sla.eigvalsh(np.outer(x, x) - np.outer(y, y))


def s_violation(z: ArrayLike, problem: PhysicsProblem, ps: ProjectorSet) -> SetViolation:
    """Worst violation of each interval set S_i plus the affine residual."""
    z = np.asarray(z, dtype=np.float64)
    per_term = tuple(
        max(0.0, float(_form_eigenvalues(x, y)[-1]))
        for x, y in term_vectors(z, problem, ps)
    )
    return SetViolation(per_term=per_term, affine_residual=_affine_residual(z, problem, ps))


def s_violation_boolean(
    z: ArrayLike, problem: PhysicsProblem, ps: ProjectorSet
) -> SetViolation:
    """Largest |eigenvalue| of x_i x_i^T - y_i y_i^T: both directions enforced."""
    z = np.asarray(z, dtype=np.float64)
    per_term = tuple(
        float(np.max(np.abs(_form_eigenvalues(x, y))))
        for x, y in term_vectors(z, problem, ps)
    )
    return SetViolation(per_term=per_term, affine_residual=_affine_residual(z, problem, ps))


def violation_for(z: ArrayLike, problem: PhysicsProblem, ps: ProjectorSet) -> SetViolation:
    """Dispatch on the problem's parameter domain."""
    if problem.domain is Domain.BOOLEAN:
        return s_violation_boolean(z, problem, ps)
    return s_violation(z, problem, ps)


def determined_mask(
    z: ArrayLike,
    problem: PhysicsProblem,
    ps: ProjectorSet,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> np.ndarray:
    """True where ||P_i A_i z|| is large enough to pin down theta_i."""
    z = np.asarray(z, dtype=np.float64)
    cutoff = tol.degenerate * (1.0 + float(np.linalg.norm(z)))
    return np.array(
        [np.linalg.norm(y) > cutoff for _, y in term_vectors(z, problem, ps)], dtype=bool
    )


def recover_theta(
    z: ArrayLike,
    problem: PhysicsProblem,
    ps: ProjectorSet,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> RecoveredTheta:
    """theta_i = <y_i, x_i> / ||y_i||^2 and the physics residual at that theta.

    Undetermined coordinates (y_i ~ 0) are set to 0 in every domain;
    ``project_theta`` maps them into the parameter set.
    """
    z = np.asarray(z, dtype=np.float64)
    mask = determined_mask(z, problem, ps, tol)
    theta = np.empty(problem.d)
    for i, ((x, y), ok) in enumerate(zip(term_vectors(z, problem, ps), mask)):
        theta[i] = float(y @ x) / float(y @ y) if ok else 0.0
    residual = float(np.linalg.norm(assemble_physics(problem, theta) @ z - problem.b))
    return RecoveredTheta(theta=theta, residual=residual)


def project_theta(theta: ArrayLike, domain: Domain) -> FloatArray:
    """Nearest point of the parameter domain (sign(0) := +1 for Boolean)."""
    theta = np.asarray(theta, dtype=np.float64)
    if domain is Domain.BOOLEAN:
        return np.where(theta < 0.0, -1.0, 1.0)
    return np.clip(theta, -1.0, 1.0)
