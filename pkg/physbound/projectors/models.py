"""Projector sets P_0..P_d, tightness certificates M_0..M_d and their residuals."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from physbound.config import DEFAULT_TOLERANCES
from physbound.problem.models import FloatArray


class ProjectorMethod(Enum):
    INVERSE_COMPLETION = "inverse_completion"
    QR_SHORTCUT = "qr_shortcut"
    MULTI_SCENARIO = "multi_scenario"
    RANK_ONE = "rank_one"


@dataclass(frozen=True)
class ConditionResiduals:
    """Spectral-norm residuals of the three projector conditions.

    cross:      max_{i != j >= 1} ||P_i A_j|| / ||A_j||
    zero_block: max_{j >= 1}      ||P_0 A_j|| / ||A_j||
    partition:  ||sum_i M_i P_i - I||
    """
    cross: float
    zero_block: float
    partition: float

    def worst(self) -> float:
        return max(self.cross, self.zero_block, self.partition)

    def within(self, tol: float = DEFAULT_TOLERANCES.verify) -> bool:
        return self.worst() <= tol


@dataclass(frozen=True)
class ProjectorSet:
    """Blocks P_i (m_i x m) and M_i (m x m_i) for i = 0..d, index 0 first."""
    p_blocks: tuple[FloatArray, ...]
    m_blocks: tuple[FloatArray, ...]
    method: ProjectorMethod
    residuals: ConditionResiduals

    def __post_init__(self) -> None:
        for blk in self.p_blocks + self.m_blocks:
            blk.flags.writeable = False

    @property
    def d(self) -> int:
        return len(self.p_blocks) - 1

    @property
    def m(self) -> int:
        return self.p_blocks[0].shape[1]

    @property
    def m0(self) -> int:
        return self.p_blocks[0].shape[0]

    @property
    def sizes(self) -> tuple[int, ...]:
        """Row counts m_1..m_d (without m_0)."""
        return tuple(p.shape[0] for p in self.p_blocks[1:])

    @property
    def p0(self) -> FloatArray:
        return self.p_blocks[0]

    @property
    def verified(self) -> bool:
        return self.residuals.within(DEFAULT_TOLERANCES.verify)

    def stacked(self) -> FloatArray:
        """P_0..P_d stacked vertically."""
        return np.vstack(self.p_blocks)
