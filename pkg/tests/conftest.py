"""Shared fixtures: hand-checkable instances and seeded generated ones."""
from __future__ import annotations

import numpy as np
import pytest

from physbound.assets.generate import InstanceKind, generate_instance
from physbound.problem.models import (
    Domain,
    FactoredTerm,
    PhysicsProblem,
    ProblemInstance,
    QuadraticObjective,
)
from physbound.projectors.construction import construct_projectors

# scalar instance: A0 = 1, A1 = 0.5, b = 1, f(z) = z^2; d_star = p_star = 4/9
SCALAR_OPTIMUM = 4.0 / 9.0


def scalar_problem(domain: Domain = Domain.INTERVAL) -> PhysicsProblem:
    return PhysicsProblem(
        a0=[[1.0]],
        terms=(FactoredTerm(u=[[1.0]], v=[[0.5]]),),
        b=[1.0],
        domain=domain,
    )


def scalar_objective() -> QuadraticObjective:
    return QuadraticObjective(qmat=[[1.0]], qvec=[0.0], r=0.0)


def scalar_dual(n: float) -> float:
    """g(N) = N (1 - N/4) / (1 + 3N/4) for the scalar instance."""
    return n * (1.0 - 0.25 * n) / (1.0 + 0.75 * n)


def two_case_problem() -> PhysicsProblem:
    """A0 = I2, A1 = e1 e1^T, b = [2, 0]: theta = -1 is singular."""
    e1 = np.array([[1.0], [0.0]])
    return PhysicsProblem(
        a0=np.eye(2), terms=(FactoredTerm(u=e1, v=e1),), b=[2.0, 0.0], domain=Domain.BOOLEAN
    )


def instance(kind: str, m: int, d: int, seed: int, **kwargs) -> ProblemInstance:
    return generate_instance(InstanceKind(kind), m, d, seed=seed, **kwargs)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240617)


@pytest.fixture
def scalar():
    problem = scalar_problem()
    return problem, construct_projectors(problem), scalar_objective()


@pytest.fixture
def multi_instance() -> ProblemInstance:
    """m = 6, two 2-column terms: m_0 = 2 so nu is exercised."""
    return instance("multi_scenario_diag", 6, 2, seed=3, block_size=2)


@pytest.fixture
def multi(multi_instance):
    problem = multi_instance.problem
    return problem, construct_projectors(problem), multi_instance.objective


@pytest.fixture
def rank_one_instance() -> ProblemInstance:
    return instance("rank_one_loads", 5, 3, seed=11)
