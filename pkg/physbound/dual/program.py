"""The dual semidefinite program in explicit conic form.

Decision vector x = [svec(N_1), ..., svec(N_d), nu, s]. The program is

    maximize    offset + c^T x
    subject to  F_0 + sum_k x_k F_k  >= 0     (Schur block, order n + 1)
                smat(svec(N_i))      >= 0     (interval mode only)

where the Schur block is [[T, u], [u^T, s]], so the optimum reproduces
sup g = sup (v - u^T T^+ u). Every LMI is stored with its coefficient
matrices materialized per variable.
"""
from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass

import numpy as np

from physbound.dual.lagrangian import DualMode, DualPoint
from physbound.problem.models import FloatArray, PhysicsProblem, QuadraticObjective
from physbound.projectors.models import ProjectorSet

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)


# ---------------------------------------------------------------------------
# svec
# ---------------------------------------------------------------------------

def svec_size(k: int) -> int:
    return k * (k + 1) // 2


def svec(a: FloatArray) -> FloatArray:
    """Row-major upper triangle, off-diagonals scaled by sqrt(2)."""
    k = a.shape[0]
    rows, cols = np.triu_indices(k)
    scale = np.where(rows == cols, 1.0, SQRT2)
    return a[rows, cols] * scale


def smat(x: FloatArray, k: int) -> FloatArray:
    """Inverse of ``svec``."""
    rows, cols = np.triu_indices(k)
    scale = np.where(rows == cols, 1.0, 1.0 / SQRT2)
    a = np.zeros((k, k))
    a[rows, cols] = x * scale
    a[cols, rows] = x * scale
    return a


def svec_basis(k: int) -> list[FloatArray]:
    """Matrices E_j with smat(x) = sum_j x_j E_j, in svec order."""
    basis = []
    for a, b in zip(*np.triu_indices(k)):
        e = np.zeros((k, k))
        if a == b:
            e[a, a] = 1.0
        else:
            e[a, b] = e[b, a] = 1.0 / SQRT2
        basis.append(e)
    return basis


# ---------------------------------------------------------------------------
# Program description
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VariableBlock:
    name: str
    start: int
    stop: int
    # matrix order for svec blocks, 0 for plain vectors
    order: int = 0

    @property
    def size(self) -> int:
        return self.stop - self.start


@dataclass(frozen=True)
class LinearMatrixInequality:
    """offset + sum_k x_k coeffs[k] >= 0, all matrices symmetric."""
    name: str
    offset: FloatArray
    coeffs: FloatArray  # shape (nvar, order, order)

    @property
    def order(self) -> int:
        return self.offset.shape[0]

    def evaluate(self, x: FloatArray) -> FloatArray:
        return self.offset + np.tensordot(x, self.coeffs, axes=1)


@dataclass(frozen=True)
class ConicProgram:
    objective: FloatArray
    objective_offset: float
    lmis: tuple[LinearMatrixInequality, ...]
    blocks: tuple[VariableBlock, ...]
    mode: DualMode

    @property
    def nvar(self) -> int:
        return self.objective.size

    def block(self, name: str) -> VariableBlock:
        for blk in self.blocks:
            if blk.name == name:
                return blk
        raise KeyError(name)

    def objective_value(self, x: FloatArray) -> float:
        return float(self.objective_offset + self.objective @ x)

    def decode(self, x: FloatArray) -> tuple[DualPoint, float]:
        """Split a solution vector into a dual point and the Schur scalar s."""
        n_blocks = [
            smat(x[blk.start:blk.stop], blk.order)
            for blk in self.blocks if blk.name.startswith("N_")
        ]
        nu_blk = self.block("nu")
        s_blk = self.block("s")
        dp = DualPoint(n_blocks=tuple(n_blocks), nu=x[nu_blk.start:nu_blk.stop], mode=self.mode)
        return dp, float(x[s_blk.start])

    def encode(self, dp: DualPoint, s: float) -> FloatArray:
        parts = [svec(n) for n in dp.n_blocks] + [dp.nu, np.array([s])]
        return np.concatenate(parts)

    def to_sdpa(self) -> str:
        """SDPA sparse format.

        SDPA minimizes c^T x subject to sum_k x_k F_k - F_0 >= 0, so the
        objective is negated and F_0 is the negated offset.
        """
        out = io.StringIO()
        out.write("* physbound dual program (SDPA sparse format)\n")
        out.write("* sense: original program maximizes offset + c^T x; SDPA c = -c\n")
        out.write(f"* objective_offset {self.objective_offset!r}\n")
        out.write(f"{self.nvar} = mDIM\n")
        out.write(f"{len(self.lmis)} = nBLOCK\n")
        out.write(" ".join(str(lmi.order) for lmi in self.lmis) + " = bLOCKsTRUCT\n")
        out.write(" ".join(repr(float(-c)) for c in self.objective) + "\n")
        for blk_no, lmi in enumerate(self.lmis, start=1):
            rows, cols = np.triu_indices(lmi.order)
            mats = [-lmi.offset] + [lmi.coeffs[k] for k in range(self.nvar)]
            for mat_no, mat in enumerate(mats):
                for i, j in zip(rows, cols):
                    value = float(mat[i, j])
                    if value != 0.0:
                        out.write(f"{mat_no} {blk_no} {i + 1} {j + 1} {value!r}\n")
        return out.getvalue()


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------

def _layout(ps: ProjectorSet) -> tuple[VariableBlock, ...]:
    blocks = []
    start = 0
    for i, k in enumerate(ps.sizes, start=1):
        blocks.append(VariableBlock(f"N_{i}", start, start + svec_size(k), order=k))
        start += svec_size(k)
    blocks.append(VariableBlock("nu", start, start + ps.m0))
    start += ps.m0
    blocks.append(VariableBlock("s", start, start + 1))
    return tuple(blocks)


def build_dual_sdp(
    problem: PhysicsProblem,
    ps: ProjectorSet,
    obj: QuadraticObjective,
    mode: DualMode = DualMode.INTERVAL_PSD,
) -> ConicProgram:
    n = problem.n
    a0, b = problem.a0, problem.b
    blocks = _layout(ps)
    nvar = blocks[-1].stop

    c = np.zeros(nvar)
    schur_offset = np.zeros((n + 1, n + 1))
    schur_offset[:n, :n] = obj.qmat
    schur_offset[:n, n] = obj.qvec
    schur_offset[n, :n] = obj.qvec
    schur = np.zeros((nvar, n + 1, n + 1))
    lmis: list[LinearMatrixInequality] = []

    for i, (p, term) in enumerate(zip(ps.p_blocks[1:], problem.terms), start=1):
        blk = blocks[i - 1]
        h = p @ a0                       # P_i A_0
        hb = p @ b                       # P_i b
        kmat = (p @ term.u) @ term.v.T   # P_i A_i
        c[blk.start:blk.stop] = svec(np.outer(hb, hb))
        psd_coeffs = np.zeros((nvar, blk.order, blk.order))
        for j, e in enumerate(svec_basis(blk.order)):
            col = blk.start + j
            schur[col, :n, :n] = h.T @ e @ h - kmat.T @ e @ kmat
            u_part = -(h.T @ (e @ hb))
            schur[col, :n, n] = u_part
            schur[col, n, :n] = u_part
            psd_coeffs[col] = e
        if mode is DualMode.INTERVAL_PSD:
            lmis.append(
                LinearMatrixInequality(
                    name=blk.name, offset=np.zeros((blk.order, blk.order)), coeffs=psd_coeffs
                )
            )

    nu_blk = blocks[-2]
    if ps.m0:
        p0a0 = ps.p0 @ a0
        c[nu_blk.start:nu_blk.stop] = -(ps.p0 @ b)
        for j in range(ps.m0):
            col = nu_blk.start + j
            schur[col, :n, n] = 0.5 * p0a0[j]
            schur[col, n, :n] = 0.5 * p0a0[j]

    s_col = blocks[-1].start
    c[s_col] = -1.0
    schur[s_col, n, n] = 1.0

    lmis.insert(0, LinearMatrixInequality(name="schur", offset=schur_offset, coeffs=schur))
    logger.debug(
        "dual program: %d variables, LMI orders %s", nvar, [lmi.order for lmi in lmis]
    )
    return ConicProgram(
        objective=c,
        objective_offset=obj.r,
        lmis=tuple(lmis),
        blocks=blocks,
        mode=mode,
    )
