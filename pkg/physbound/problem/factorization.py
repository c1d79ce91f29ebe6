"""Low-rank factorization of design terms and the stacked-U rank check."""
from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from numpy.typing import ArrayLike

from physbound.config import DEFAULT_TOLERANCES
from physbound.errors import DimensionError, FactorizationError
from physbound.problem.models import FactoredTerm, FloatArray

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StackedU:
    """U = [U_1 ... U_d] with per-term column ranges and its numerical rank."""
    u: FloatArray
    block_offsets: tuple[tuple[int, int], ...]
    rank: int
    full_column_rank: bool

    @property
    def m(self) -> int:
        return self.u.shape[0]

    @property
    def columns(self) -> int:
        return self.u.shape[1]

    def block(self, i: int) -> FloatArray:
        """Columns of term i (1-based)."""
        start, stop = self.block_offsets[i - 1]
        return self.u[:, start:stop]


def factor_term(a_i: ArrayLike, tol: float = DEFAULT_TOLERANCES.factor) -> FactoredTerm:
    """Reduced SVD factorization A_i = U_i V_i^T.

    U_i holds orthonormal left singular vectors; the singular values are
    folded into V_i. The rank is cut at ``tol`` times the largest singular
    value, so the spectral reconstruction error is at most ``tol * ||A_i||``.
    """
    a = np.atleast_2d(np.asarray(a_i, dtype=np.float64))
    if a.size == 0 or not np.any(a):
        raise FactorizationError("cannot factor a zero design term")
    left, s, right_t = sla.svd(a, full_matrices=False)
    k = int(np.count_nonzero(s > tol * s[0]))
    u = left[:, :k]
    v = right_t[:k].T * s[:k]
    logger.debug("factored %dx%d term at rank %d", a.shape[0], a.shape[1], k)
    return FactoredTerm(u=u, v=v)


def reconstruction_error(term: FactoredTerm, a_i: ArrayLike) -> float:
    """Spectral norm of U V^T - A_i."""
    diff = term.dense() - np.atleast_2d(np.asarray(a_i, dtype=np.float64))
    return float(np.linalg.norm(diff, 2)) if diff.size else 0.0


def pivoted_rank(u: FloatArray, rel_tol: float = DEFAULT_TOLERANCES.rank) -> int:
    """Numerical rank from a column-pivoted QR factorization."""
    if u.size == 0:
        return 0
    r = sla.qr(u, mode="r", pivoting=True)[0]
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        return 0
    return int(np.count_nonzero(diag > rel_tol * diag[0]))


def stack_terms(
    terms: Sequence[FactoredTerm], rel_tol: float = DEFAULT_TOLERANCES.rank
) -> StackedU:
    """Concatenate U-factors in term order and check for full column rank."""
    if not terms:
        raise DimensionError("at least one term is required")
    m = terms[0].u.shape[0]
    offsets: list[tuple[int, int]] = []
    start = 0
    for i, term in enumerate(terms, start=1):
        if term.u.shape[0] != m:
            raise DimensionError(
                f"term {i}: U has {term.u.shape[0]} rows, expected {m}"
            )
        offsets.append((start, start + term.rank))
        start += term.rank
    u = np.hstack([t.u for t in terms])
    rank = pivoted_rank(u, rel_tol)
    full = rank == u.shape[1] and u.shape[1] <= m
    if not full:
        logger.debug("stacked U is rank deficient: rank %d, %d columns", rank, u.shape[1])
    u.flags.writeable = False
    return StackedU(u=u, block_offsets=tuple(offsets), rank=rank, full_column_rank=full)
