"""Seeded generators of desk-scale test instances.

- multi_scenario_diag: diagonally dominant A0, diagonal design terms on
  disjoint row sets (standard-basis selectors).
- rank_one_loads: A0 close to 3 I plus rank-one terms u_i v_i^T with
  sum ||v_i|| <= 1.
- helmholtz_1d: tridiag(-1, 3, -1) with per-cell diagonal perturbations and
  a point source.

All generators keep A(theta) invertible over the whole box [-1, 1]^d and
produce a full-column-rank stacked U, so every theta is solvable.
"""
from __future__ import annotations

import logging
from enum import Enum

import numpy as np

from physbound.errors import GuardError
from physbound.problem.factorization import pivoted_rank
from physbound.problem.models import (
    Domain,
    FactoredTerm,
    PhysicsProblem,
    ProblemInstance,
    QuadraticObjective,
)

logger = logging.getLogger(__name__)

MAX_SIZE = 64
MAX_TERMS = 8


class InstanceKind(Enum):
    MULTI_SCENARIO_DIAG = "multi_scenario_diag"
    RANK_ONE_LOADS = "rank_one_loads"
    HELMHOLTZ_1D = "helmholtz_1d"


def _check_guards(m: int, d: int, block_size: int) -> None:
    if not 1 <= m <= MAX_SIZE:
        raise GuardError(f"m must be in [1, {MAX_SIZE}], got {m}")
    if not 1 <= d <= MAX_TERMS:
        raise GuardError(f"d must be in [1, {MAX_TERMS}], got {d}")
    if block_size < 1 or d * block_size > m:
        raise GuardError(
            f"{d} terms of {block_size} column(s) need m >= {d * block_size}, got m = {m}"
        )


def _signed(rng: np.random.Generator, size: int, lo: float, hi: float) -> np.ndarray:
    return rng.uniform(lo, hi, size) * rng.choice((-1.0, 1.0), size)


def _multi_scenario_diag(
    rng: np.random.Generator, m: int, d: int, block_size: int
) -> PhysicsProblem:
    a0 = 0.3 / m * rng.uniform(-1.0, 1.0, (m, m))
    np.fill_diagonal(a0, 2.0 + rng.uniform(0.0, 1.0, m))
    eye = np.eye(m)
    rows = rng.permutation(m)[: d * block_size]
    terms = []
    for i in range(d):
        picked = np.sort(rows[i * block_size:(i + 1) * block_size])
        u = eye[:, picked]
        v = u * _signed(rng, block_size, 0.2, 0.6)
        terms.append(FactoredTerm(u=u, v=v))
    b = rng.standard_normal(m)
    return PhysicsProblem(a0=a0, terms=tuple(terms), b=b)


def _rank_one_loads(rng: np.random.Generator, m: int, d: int) -> PhysicsProblem:
    a0 = 3.0 * np.eye(m) + 0.1 / m * rng.uniform(-1.0, 1.0, (m, m))
    while True:
        u = rng.standard_normal((m, d))
        if pivoted_rank(u) == d:
            break
    u /= np.linalg.norm(u, axis=0)
    v = rng.standard_normal((m, d))
    budget = rng.dirichlet(np.ones(d))
    v *= budget / np.linalg.norm(v, axis=0)
    terms = tuple(FactoredTerm(u=u[:, i:i + 1], v=v[:, i:i + 1]) for i in range(d))
    return PhysicsProblem(a0=a0, terms=terms, b=rng.standard_normal(m))


def _helmholtz_1d(rng: np.random.Generator, m: int, d: int) -> PhysicsProblem:
    a0 = 3.0 * np.eye(m) - np.eye(m, k=1) - np.eye(m, k=-1)
    eye = np.eye(m)
    cells = np.sort(rng.choice(m, size=d, replace=False))
    coeffs = _signed(rng, d, 0.1, 0.5)
    terms = tuple(
        FactoredTerm(u=eye[:, [j]], v=c * eye[:, [j]]) for j, c in zip(cells, coeffs)
    )
    b = np.zeros(m)
    b[rng.integers(m)] = 1.0
    return PhysicsProblem(a0=a0, terms=terms, b=b)


def generate_instance(
    kind: InstanceKind | str,
    m: int,
    d: int,
    seed: int = 0,
    block_size: int = 1,
    domain: Domain | str = Domain.INTERVAL,
) -> ProblemInstance:
    """A square (n = m) instance with objective ||z - target||^2.

    ``block_size`` sets m_i for ``multi_scenario_diag``; the other kinds are
    rank one per term.
    """
    kind = InstanceKind(kind)
    if kind is not InstanceKind.MULTI_SCENARIO_DIAG:
        block_size = 1
    _check_guards(m, d, block_size)
    rng = np.random.default_rng(seed)
    if kind is InstanceKind.MULTI_SCENARIO_DIAG:
        problem = _multi_scenario_diag(rng, m, d, block_size)
    elif kind is InstanceKind.RANK_ONE_LOADS:
        problem = _rank_one_loads(rng, m, d)
    else:
        problem = _helmholtz_1d(rng, m, d)
    problem = problem.with_domain(Domain(domain))
    target = 0.5 * rng.standard_normal(m)
    logger.debug("generated %s instance m=%d d=%d seed=%d", kind.value, m, d, seed)
    return ProblemInstance(
        problem=problem,
        objective=QuadraticObjective.squared_distance(target),
        reconstruction=(None,) * d,
    )
