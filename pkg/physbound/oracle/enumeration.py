"""Ground-truth primal values at desk scale.

``brute_force_boolean`` is exact over {-1, +1}^d. ``grid_search_interval``
only samples [-1, 1]^d, so its value is an upper bound on the true optimum.
Unsolvable parameter values contribute +inf.
"""
from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Iterable, Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from physbound.config import DEFAULT_TOLERANCES, Tolerances
from physbound.dual.bound import BoundReport
from physbound.errors import GuardError
from physbound.problem.models import FloatArray, PhysicsProblem, QuadraticObjective
from physbound.problem.physics import solve_field

logger = logging.getLogger(__name__)

MAX_BOOLEAN_TERMS = 24
MAX_GRID_TERMS = 3


@dataclass(frozen=True)
class OracleResult:
    p_star: float
    argmin_theta: FloatArray | None
    argmin_z: FloatArray | None
    evaluated_count: int

    @property
    def feasible(self) -> bool:
        return math.isfinite(self.p_star)


@dataclass(frozen=True)
class WeakDualityCheck:
    passed: bool
    # p_star - d_star; +inf when the check holds vacuously
    margin: float
    vacuous: bool


# (value, theta, z); value is +inf for unsolvable theta
_Candidate = tuple[float, tuple[float, ...], FloatArray | None]


# thetas evaluated per pool.map call; bounds the in-flight candidates
_CHUNK = 4096


def _evaluate(
    problem: PhysicsProblem, obj: QuadraticObjective, theta: Sequence[float], tol: Tolerances
) -> _Candidate:
    key = tuple(float(t) for t in theta)
    sol = solve_field(problem, key, tol)
    if not sol.solvable:
        return math.inf, key, None
    value = obj(sol.z)
    if math.isnan(value):
        return math.inf, key, None
    return value, key, sol.z


def _better(candidate: _Candidate, best: _Candidate | None) -> bool:
    # ties break on the lexicographically smallest theta, independent of order
    return best is None or (candidate[0], candidate[1]) < (best[0], best[1])


def _candidates(
    problem: PhysicsProblem,
    obj: QuadraticObjective,
    thetas: Iterable[Sequence[float]],
    jobs: int,
    tol: Tolerances,
) -> Iterator[_Candidate]:
    if jobs <= 1:
        for theta in thetas:
            yield _evaluate(problem, obj, theta, tol)
        return
    it = iter(thetas)
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        while chunk := list(itertools.islice(it, _CHUNK)):
            yield from pool.map(lambda t: _evaluate(problem, obj, t, tol), chunk)


def _run(
    problem: PhysicsProblem,
    obj: QuadraticObjective,
    thetas: Iterable[Sequence[float]],
    jobs: int,
    tol: Tolerances,
) -> OracleResult:
    best: _Candidate | None = None
    count = 0
    for candidate in _candidates(problem, obj, thetas, jobs, tol):
        count += 1
        if _better(candidate, best):
            best = candidate
    if best is None or not math.isfinite(best[0]):
        result = OracleResult(p_star=math.inf, argmin_theta=None, argmin_z=None, evaluated_count=count)
    else:
        value, theta, z = best
        result = OracleResult(
            p_star=value, argmin_theta=np.array(theta), argmin_z=z, evaluated_count=count
        )
    logger.debug("oracle: %d evaluations, p_star %.12g", result.evaluated_count, result.p_star)
    return result


def brute_force_boolean(
    problem: PhysicsProblem,
    obj: QuadraticObjective,
    patterns: Iterable[Sequence[float]] | None = None,
    jobs: int = 1,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> OracleResult:
    """Exact minimum of f over all 2^d sign patterns with solvable systems.

    ``patterns`` overrides the enumeration order (any permutation of the
    sign patterns gives the same result).
    """
    if problem.d > MAX_BOOLEAN_TERMS:
        raise GuardError(
            f"Boolean enumeration needs d <= {MAX_BOOLEAN_TERMS}, got d = {problem.d}"
        )
    if patterns is None:
        patterns = itertools.product((-1.0, 1.0), repeat=problem.d)
    return _run(problem, obj, patterns, jobs, tol)


def grid_search_interval(
    problem: PhysicsProblem,
    obj: QuadraticObjective,
    points_per_axis: int,
    jobs: int = 1,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> OracleResult:
    """Minimum over the uniform grid on [-1, 1]^d, endpoints included."""
    if problem.d > MAX_GRID_TERMS:
        raise GuardError(f"grid search needs d <= {MAX_GRID_TERMS}, got d = {problem.d}")
    if points_per_axis < 2:
        raise GuardError(f"grid search needs at least 2 points per axis, got {points_per_axis}")
    axis = [float(t) for t in np.linspace(-1.0, 1.0, points_per_axis)]
    return _run(problem, obj, itertools.product(axis, repeat=problem.d), jobs, tol)


def verify_weak_duality(
    bound: BoundReport, oracle: OracleResult, tol: float = DEFAULT_TOLERANCES.weak_duality
) -> WeakDualityCheck:
    """Pass iff d_star <= p_star + tol * (1 + |p_star|)."""
    d, p = bound.d_star, oracle.p_star
    if p == math.inf:
        return WeakDualityCheck(passed=True, margin=math.inf, vacuous=True)
    if d == -math.inf:
        return WeakDualityCheck(passed=True, margin=math.inf, vacuous=False)
    if math.isnan(d) or d == math.inf:
        return WeakDualityCheck(passed=False, margin=-math.inf, vacuous=False)
    margin = p - d
    passed = d <= p + tol * (1.0 + abs(p))
    if not passed:
        logger.warning("weak duality violated: d_star %.12g > p_star %.12g", d, p)
    return WeakDualityCheck(passed=passed, margin=margin, vacuous=False)
