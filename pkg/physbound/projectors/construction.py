"""Constructions of projector sets.

- ``construct_inverse``: basis completion U_0 and the inverse of [U_0 U].
- ``construct_qr``: blocks of the full QR factor Q of U. Only guaranteed to
  satisfy P_i A_j = 0 for mutually orthogonal U-blocks, so its output must be
  gated on ``ProjectorSet.verified``.
- ``multi_scenario``: closed form for disjoint standard-basis selectors.
- ``rank_one``: closed form when every term is rank one.
"""
from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np
import scipy.linalg as sla

from physbound.errors import (
    NotFullColumnRankError,
    NotMultiScenarioError,
    NotRankOneError,
)
from physbound.problem.factorization import StackedU, stack_terms
from physbound.problem.models import FactoredTerm, FloatArray, PhysicsProblem
from physbound.projectors.conditions import condition_residuals
from physbound.projectors.models import ProjectorMethod, ProjectorSet

logger = logging.getLogger(__name__)


def _split_rows(mat: FloatArray, sizes: Sequence[int]) -> list[FloatArray]:
    blocks = []
    start = 0
    for k in sizes:
        blocks.append(np.array(mat[start:start + k]))
        start += k
    return blocks


def _build(
    p_blocks: list[FloatArray],
    m_blocks: list[FloatArray],
    terms: Sequence[FactoredTerm],
    method: ProjectorMethod,
) -> ProjectorSet:
    res = condition_residuals(p_blocks, m_blocks, terms)
    ps = ProjectorSet(
        p_blocks=tuple(p_blocks), m_blocks=tuple(m_blocks), method=method, residuals=res
    )
    if not ps.verified:
        logger.warning(
            "%s projector set is unverified (worst residual %.3e)",
            method.value, res.worst(),
        )
    return ps


def _require_full_rank(stacked: StackedU) -> None:
    if not stacked.full_column_rank:
        raise NotFullColumnRankError(stacked.rank, stacked.columns)


def basis_completion(u: FloatArray) -> FloatArray:
    """Orthonormal basis of the orthogonal complement of col(u), as columns."""
    m, k = u.shape
    q, _ = sla.qr(u, mode="full")
    return q[:, k:m]


def construct_inverse(stacked: StackedU, terms: Sequence[FactoredTerm]) -> ProjectorSet:
    """Rows of inv([U_0 U]) give P_0..P_d; M_i = U_i and M_0 = U_0."""
    _require_full_rank(stacked)
    u0 = basis_completion(stacked.u)
    u_tilde = np.hstack([u0, stacked.u])
    inv = sla.inv(u_tilde)
    sizes = [u0.shape[1]] + [stop - start for start, stop in stacked.block_offsets]
    p_blocks = _split_rows(inv, sizes)
    m_blocks = [u0] + [np.array(stacked.block(i)) for i in range(1, len(terms) + 1)]
    return _build(p_blocks, m_blocks, terms, ProjectorMethod.INVERSE_COMPLETION)


def construct_qr(stacked: StackedU, terms: Sequence[FactoredTerm]) -> ProjectorSet:
    """P_i = Q_i^T, M_i = Q_i from the full QR factorization U = QR.

    The first sum(m_i) columns of Q are split by term; the trailing m_0
    columns span the complement and form Q_0.
    """
    _require_full_rank(stacked)
    q, _ = sla.qr(stacked.u, mode="full")
    k = stacked.columns
    q_blocks = [q[:, k:]] + [q[:, start:stop] for start, stop in stacked.block_offsets]
    p_blocks = [np.array(qb.T) for qb in q_blocks]
    m_blocks = [np.array(qb) for qb in q_blocks]
    return _build(p_blocks, m_blocks, terms, ProjectorMethod.QR_SHORTCUT)


def _selector_rows(u: FloatArray, i: int) -> list[int]:
    """Row indices picked by a {0, 1} selector matrix, or raise."""
    rows = []
    for c in range(u.shape[1]):
        col = u[:, c]
        ones = np.flatnonzero(col == 1.0)
        if len(ones) != 1 or np.count_nonzero(col) != 1:
            raise NotMultiScenarioError(
                f"term {i}, column {c}: not a standard basis vector"
            )
        rows.append(int(ones[0]))
    return rows


def multi_scenario(terms: Sequence[FactoredTerm]) -> ProjectorSet:
    """P_i = U_i^T for disjoint selectors; P_0 selects the unused rows."""
    if not terms:
        raise NotMultiScenarioError("at least one term is required")
    m = terms[0].u.shape[0]
    used: set[int] = set()
    for i, term in enumerate(terms, start=1):
        for row in _selector_rows(term.u, i):
            if row in used:
                raise NotMultiScenarioError(
                    f"term {i}: basis vector e_{row} is shared with another term"
                )
            used.add(row)
    eye = np.eye(m)
    unused = [r for r in range(m) if r not in used]
    p_blocks = [eye[unused]] + [np.array(t.u.T) for t in terms]
    m_blocks = [np.array(p.T) for p in p_blocks]
    return _build(p_blocks, m_blocks, terms, ProjectorMethod.MULTI_SCENARIO)


def rank_one(terms: Sequence[FactoredTerm]) -> ProjectorSet:
    """Closed form for A_i = u_i v_i^T.

    p_i^T are the rows of pinv([u_1 ... u_d]) so that p_i^T u_j = delta_ij;
    P_0 has orthonormal rows spanning the complement of span{u_i}.
    """
    for i, term in enumerate(terms, start=1):
        if term.rank != 1:
            raise NotRankOneError(f"term {i} has {term.rank} columns, expected 1")
    stacked = stack_terms(terms)
    _require_full_rank(stacked)
    u = stacked.u
    p0 = sla.null_space(u.T).T
    dual_rows = sla.pinv(u)
    p_blocks = [p0] + [dual_rows[i:i + 1] for i in range(len(terms))]
    m_blocks = [np.array(p0.T)] + [np.array(t.u) for t in terms]
    return _build(p_blocks, m_blocks, terms, ProjectorMethod.RANK_ONE)


def construct_projectors(
    problem: PhysicsProblem,
    method: ProjectorMethod = ProjectorMethod.INVERSE_COMPLETION,
) -> ProjectorSet:
    """Build a projector set for ``problem`` with the requested method."""
    terms = problem.terms
    if method is ProjectorMethod.MULTI_SCENARIO:
        return multi_scenario(terms)
    if method is ProjectorMethod.RANK_ONE:
        return rank_one(terms)
    stacked = stack_terms(terms)
    if method is ProjectorMethod.QR_SHORTCUT:
        return construct_qr(stacked, terms)
    return construct_inverse(stacked, terms)
