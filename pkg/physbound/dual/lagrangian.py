"""Lagrangian, its quadratic coefficients in z, and the dual function.

    L(z, N, nu) = f(z)
                + sum_i [ (b - A0 z)^T G_i (b - A0 z) - z^T A_i^T G_i A_i z ]
                + nu^T (P0 A0 z - P0 b),          G_i = P_i^T N_i P_i

Expanding in z gives L = z^T T z + 2 u^T z + v with

    T = Q + A0^T G A0 - sum_i A_i^T G_i A_i
    u = q - A0^T G b + 1/2 A0^T P0^T nu
    v = r + b^T G b - nu^T P0 b

and g(N, nu) = v - u^T T^+ u when T is PSD and u lies in range(T).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla
from numpy.typing import ArrayLike

from physbound.config import DEFAULT_TOLERANCES, Tolerances
from physbound.errors import DimensionError
from physbound.problem.models import (
    Domain,
    FloatArray,
    PhysicsProblem,
    QuadraticObjective,
)
from physbound.projectors.models import ProjectorSet

logger = logging.getLogger(__name__)


class DualMode(Enum):
    INTERVAL_PSD = "interval"       # N_i PSD
    BOOLEAN_SYMMETRIC = "boolean"   # N_i symmetric

    @classmethod
    def for_domain(cls, domain: Domain) -> DualMode:
        return cls.BOOLEAN_SYMMETRIC if domain is Domain.BOOLEAN else cls.INTERVAL_PSD


def _sym(a: FloatArray) -> FloatArray:
    return 0.5 * (a + a.T)


@dataclass(frozen=True)
class DualPoint:
    n_blocks: tuple[FloatArray, ...]
    nu: FloatArray
    mode: DualMode = DualMode.INTERVAL_PSD

    def __post_init__(self) -> None:
        blocks = []
        for n in self.n_blocks:
            blk = _sym(np.array(n, dtype=np.float64, ndmin=2))
            blk.flags.writeable = False
            blocks.append(blk)
        nu = np.array(np.ravel(self.nu), dtype=np.float64)
        nu.flags.writeable = False
        object.__setattr__(self, "n_blocks", tuple(blocks))
        object.__setattr__(self, "nu", nu)

    @classmethod
    def zeros(cls, ps: ProjectorSet, mode: DualMode = DualMode.INTERVAL_PSD) -> DualPoint:
        return cls(
            n_blocks=tuple(np.zeros((k, k)) for k in ps.sizes),
            nu=np.zeros(ps.m0),
            mode=mode,
        )

    def min_eigenvalue(self) -> float:
        if not self.n_blocks:
            return 0.0
        return min(float(sla.eigvalsh(n)[0]) for n in self.n_blocks)

    def is_feasible(self, tol: float = DEFAULT_TOLERANCES.psd) -> bool:
        if self.mode is DualMode.BOOLEAN_SYMMETRIC:
            return True
        return self.min_eigenvalue() >= -tol

    def scaled(self, beta: float) -> DualPoint:
        return DualPoint(
            n_blocks=tuple(beta * n for n in self.n_blocks), nu=beta * self.nu, mode=self.mode
        )

    def combine(self, other: DualPoint, lam: float) -> DualPoint:
        """lam * self + (1 - lam) * other."""
        return DualPoint(
            n_blocks=tuple(
                lam * a + (1.0 - lam) * b for a, b in zip(self.n_blocks, other.n_blocks)
            ),
            nu=lam * self.nu + (1.0 - lam) * other.nu,
            mode=self.mode,
        )

    def project_psd(self) -> DualPoint:
        """Clip negative eigenvalues of every block (no-op for Boolean mode)."""
        if self.mode is DualMode.BOOLEAN_SYMMETRIC:
            return self
        return DualPoint(
            n_blocks=tuple(psd_projection(n) for n in self.n_blocks), nu=self.nu, mode=self.mode
        )


def psd_projection(n: FloatArray) -> FloatArray:
    w, vecs = sla.eigh(n)
    return (vecs * np.clip(w, 0.0, None)) @ vecs.T


class QuadraticCoefficients(NamedTuple):
    t_hat: FloatArray
    u_hat: FloatArray
    v_hat: float


def _check(dp: DualPoint, ps: ProjectorSet) -> None:
    if tuple(n.shape[0] for n in dp.n_blocks) != ps.sizes or dp.nu.size != ps.m0:
        raise DimensionError(
            f"dual point blocks {[n.shape[0] for n in dp.n_blocks]} / nu {dp.nu.size} "
            f"do not match projector sizes {list(ps.sizes)} / m0 {ps.m0}"
        )


def gram_blocks(dp: DualPoint, ps: ProjectorSet) -> list[FloatArray]:
    """G_i = P_i^T N_i P_i for i = 1..d."""
    return [p.T @ n @ p for p, n in zip(ps.p_blocks[1:], dp.n_blocks)]


def eval_lagrangian(
    z: ArrayLike,
    dp: DualPoint,
    problem: PhysicsProblem,
    ps: ProjectorSet,
    obj: QuadraticObjective,
) -> float:
    _check(dp, ps)
    z = np.asarray(z, dtype=np.float64)
    rhs = problem.b - problem.a0 @ z
    value = obj(z)
    for p, n, term in zip(ps.p_blocks[1:], dp.n_blocks, problem.terms):
        x = p @ rhs
        y = p @ term.apply(z)
        value += float(x @ n @ x - y @ n @ y)
    if ps.m0:
        value += float(dp.nu @ (ps.p0 @ (problem.a0 @ z) - ps.p0 @ problem.b))
    return value


def assemble_quadratic(
    dp: DualPoint,
    problem: PhysicsProblem,
    ps: ProjectorSet,
    obj: QuadraticObjective,
) -> QuadraticCoefficients:
    """(T, u, v) with L(z, dp) = z^T T z + 2 u^T z + v identically in z."""
    _check(dp, ps)
    a0, b = problem.a0, problem.b
    grams = gram_blocks(dp, ps)
    g_total = sum(grams, np.zeros((problem.m, problem.m)))

    t_hat = obj.qmat + a0.T @ g_total @ a0
    for p, n, term in zip(ps.p_blocks[1:], dp.n_blocks, problem.terms):
        # A_i^T G_i A_i = V_i (P_i U_i)^T N_i (P_i U_i) V_i^T
        w = p @ term.u
        t_hat = t_hat - term.v @ (w.T @ n @ w) @ term.v.T
    u_hat = obj.qvec - a0.T @ (g_total @ b)
    v_hat = obj.r + float(b @ g_total @ b)
    if ps.m0:
        u_hat = u_hat + 0.5 * (a0.T @ (ps.p0.T @ dp.nu))
        v_hat -= float(dp.nu @ (ps.p0 @ b))
    return QuadraticCoefficients(t_hat=_sym(t_hat), u_hat=u_hat, v_hat=v_hat)


def dual_from_coefficients(
    coeffs: QuadraticCoefficients, tol: Tolerances = DEFAULT_TOLERANCES
) -> float:
    """inf_z z^T T z + 2 u^T z + v, or -inf when unbounded below."""
    t_hat, u_hat, v_hat = coeffs
    w, vecs = sla.eigh(t_hat)
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    if w.size and w[0] < -tol.psd * (1.0 + scale):
        return float("-inf")
    keep = w > tol.pinv * scale if scale > 0 else np.zeros(w.shape, dtype=bool)
    coords = vecs.T @ u_hat
    null_part = float(np.linalg.norm(coords[~keep]))
    if null_part > tol.range * (1.0 + float(np.linalg.norm(u_hat))):
        return float("-inf")
    return float(v_hat - np.sum(coords[keep] ** 2 / w[keep]))


def eval_dual(
    dp: DualPoint,
    problem: PhysicsProblem,
    ps: ProjectorSet,
    obj: QuadraticObjective,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """Dual function g(N, nu) in closed form via the pseudoinverse of T."""
    return dual_from_coefficients(assemble_quadratic(dp, problem, ps, obj), tol)


def random_dual_point(
    ps: ProjectorSet,
    rng: np.random.Generator,
    mode: DualMode = DualMode.INTERVAL_PSD,
    scale: float = 1.0,
) -> DualPoint:
    """A random dual point; PSD blocks in interval mode."""
    blocks: list[FloatArray] = []
    for k in ps.sizes:
        g = rng.standard_normal((k, k))
        blocks.append(g @ g.T / k if mode is DualMode.INTERVAL_PSD else _sym(g))
    return DualPoint(
        n_blocks=tuple(scale * n for n in blocks),
        nu=scale * rng.standard_normal(ps.m0),
        mode=mode,
    )
