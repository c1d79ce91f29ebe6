"""Validation, assembly of A(theta) and field solves."""
from __future__ import annotations

import logging

import numpy as np
import scipy.linalg as sla
from numpy.typing import ArrayLike

from physbound.config import DEFAULT_TOLERANCES, Tolerances
from physbound.errors import DimensionError
from physbound.problem.models import FieldSolution, FloatArray, PhysicsProblem, QuadraticObjective

logger = logging.getLogger(__name__)


def numerical_rank(a: FloatArray, rel_tol: float) -> int:
    """Number of singular values above rel_tol * largest."""
    if a.size == 0:
        return 0
    s = sla.svdvals(a)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rel_tol * s[0]))


def validate_problem(p: PhysicsProblem, tol: Tolerances = DEFAULT_TOLERANCES) -> list[str]:
    """Return a list of violated dimension/rank invariants (empty if valid)."""
    report: list[str] = []
    if p.a0.ndim != 2 or p.m < 1 or p.n < 1:
        report.append(f"a0: expected a non-empty matrix, got shape {p.a0.shape}")
        return report
    m, n = p.m, p.n
    if p.b.shape != (m,):
        report.append(f"b: expected length {m}, got {p.b.size}")
    if p.d < 1:
        report.append("terms: at least one design term is required")
    if not (np.all(np.isfinite(p.a0)) and np.all(np.isfinite(p.b))):
        report.append("a0/b: non-finite entries")

    for i, term in enumerate(p.terms, start=1):
        u, v = term.u, term.v
        if u.shape[0] != m:
            report.append(f"terms[{i}].u: expected {m} rows, got {u.shape[0]}")
        if v.shape[0] != n:
            report.append(f"terms[{i}].v: expected {n} rows, got {v.shape[0]}")
        if u.shape[1] != v.shape[1]:
            report.append(
                f"terms[{i}]: u has {u.shape[1]} columns but v has {v.shape[1]}"
            )
        if u.shape[1] < 1:
            report.append(f"terms[{i}]: factors must have at least one column")
            continue
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            report.append(f"terms[{i}]: non-finite entries")
            continue
        rank = numerical_rank(u, tol.rank)
        if rank < u.shape[1]:
            report.append(
                f"terms[{i}].u: rank {rank} < {u.shape[1]} columns "
                "(columns must be linearly independent)"
            )

    if report:
        logger.debug("problem validation found %d violation(s)", len(report))
    return report


def validate_objective(obj: QuadraticObjective, n: int) -> list[str]:
    """Shape and finiteness violations of an objective over fields of length n."""
    report: list[str] = []
    if obj.qmat.shape != (n, n) or obj.qvec.shape != (n,):
        report.append(
            f"objective: expected qmat {n}x{n} and qvec of length {n}, "
            f"got {obj.qmat.shape} and {obj.qvec.shape}"
        )
    if not (np.all(np.isfinite(obj.qmat)) and np.all(np.isfinite(obj.qvec)) and np.isfinite(obj.r)):
        report.append("objective: non-finite entries")
    return report


def assemble_physics(p: PhysicsProblem, theta: ArrayLike) -> FloatArray:
    """A(theta) = A0 + sum_i theta_i U_i V_i^T, summed left to right."""
    theta = np.ravel(np.asarray(theta, dtype=np.float64))
    if theta.shape != (p.d,):
        raise DimensionError(f"theta has length {theta.size}, expected {p.d}")
    a = np.array(p.a0)
    for t, term in zip(theta, p.terms):
        a = a + t * (term.u @ term.v.T)
    return a


def solve_field(
    p: PhysicsProblem, theta: ArrayLike, tol: Tolerances = DEFAULT_TOLERANCES
) -> FieldSolution:
    """Minimum-norm least-squares field for A(theta) z = b.

    The field is flagged solvable only when A(theta) has full column rank and
    the residual passes ``tol.solve * (1 + ||b||)``.
    """
    a = assemble_physics(p, theta)
    z, _, rank, _ = sla.lstsq(a, p.b, cond=tol.rank)
    residual = float(np.linalg.norm(a @ z - p.b))
    solvable = rank == p.n and residual <= tol.solve * (1.0 + np.linalg.norm(p.b))
    if not solvable:
        logger.debug(
            "theta=%s: no field (rank %d of %d, residual %.3e)", theta, rank, p.n, residual
        )
    return FieldSolution(z=z, residual=residual, solvable=bool(solvable))
