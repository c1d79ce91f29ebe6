"""Numerical verification of the projector and tightness conditions."""
from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np

from physbound.errors import DimensionError
from physbound.problem.models import FactoredTerm, FloatArray, PhysicsProblem
from physbound.projectors.models import ConditionResiduals, ProjectorSet

logger = logging.getLogger(__name__)


def spectral_norm(a: FloatArray) -> float:
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def condition_residuals(
    p_blocks: Sequence[FloatArray],
    m_blocks: Sequence[FloatArray],
    terms: Sequence[FactoredTerm],
) -> ConditionResiduals:
    if len(p_blocks) != len(terms) + 1 or len(m_blocks) != len(p_blocks):
        raise DimensionError(
            f"expected {len(terms) + 1} projector blocks, got "
            f"{len(p_blocks)} P and {len(m_blocks)} M blocks"
        )
    m = p_blocks[0].shape[1]
    norms = [spectral_norm(t.dense()) for t in terms]

    cross = 0.0
    zero_block = 0.0
    for j, term in enumerate(terms, start=1):
        scale = norms[j - 1] if norms[j - 1] > 0 else 1.0
        for i, p in enumerate(p_blocks):
            if i == j:
                continue
            # P_i A_j = (P_i U_j) V_j^T
            r = spectral_norm((p @ term.u) @ term.v.T) / scale
            if i == 0:
                zero_block = max(zero_block, r)
            else:
                cross = max(cross, r)

    total = np.zeros((m, m))
    for p, mb in zip(p_blocks, m_blocks):
        if p.size:
            total += mb @ p
    partition = spectral_norm(total - np.eye(m))
    return ConditionResiduals(cross=cross, zero_block=zero_block, partition=partition)


def verify_conditions(ps: ProjectorSet, problem: PhysicsProblem) -> ConditionResiduals:
    """Recompute the residuals of ``ps`` against the terms of ``problem``."""
    if ps.m != problem.m or ps.d != problem.d:
        raise DimensionError(
            f"projector set is for m={ps.m}, d={ps.d}; problem has m={problem.m}, d={problem.d}"
        )
    res = condition_residuals(ps.p_blocks, ps.m_blocks, problem.terms)
    logger.debug(
        "projector residuals: cross=%.3e zero_block=%.3e partition=%.3e",
        res.cross, res.zero_block, res.partition,
    )
    return res
