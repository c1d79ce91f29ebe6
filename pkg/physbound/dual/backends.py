"""Pluggable conic backends for ``ConicProgram``.

A backend takes a program and a ``SolverConfig`` and returns the decision
vector with a normalized status. Only cvxpy ships; others register through
``register_backend``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Protocol

import cvxpy as cp
import numpy as np
import scipy.sparse as sp

from physbound.config import SolverConfig
from physbound.dual.program import ConicProgram
from physbound.errors import ConfigError
from physbound.problem.models import FloatArray

logger = logging.getLogger(__name__)


class SolverStatus(Enum):
    OPTIMAL = "Optimal"
    UNBOUNDED = "Unbounded"
    INFEASIBLE = "Infeasible"
    MAX_ITER = "MaxIter"
    NUMERICAL_TROUBLE = "NumericalTrouble"


@dataclass(frozen=True)
class ConicSolution:
    x: FloatArray | None
    status: SolverStatus
    objective: float


class ConicBackend(Protocol):
    name: str

    def solve(self, program: ConicProgram, cfg: SolverConfig) -> ConicSolution: ...


_CVXPY_STATUS = {
    cp.OPTIMAL: SolverStatus.OPTIMAL,
    cp.OPTIMAL_INACCURATE: SolverStatus.NUMERICAL_TROUBLE,
    cp.INFEASIBLE: SolverStatus.INFEASIBLE,
    cp.INFEASIBLE_INACCURATE: SolverStatus.INFEASIBLE,
    cp.UNBOUNDED: SolverStatus.UNBOUNDED,
    cp.UNBOUNDED_INACCURATE: SolverStatus.UNBOUNDED,
    cp.USER_LIMIT: SolverStatus.MAX_ITER,
}

# iteration cap keyword per solver
_MAX_ITER_KEY = {"CLARABEL": "max_iter", "SCS": "max_iters", "ECOS": "max_iters"}


def _upper_selector(k: int) -> tuple[sp.csr_matrix, np.ndarray]:
    rows, cols = np.triu_indices(k)
    flat = rows * k + cols
    sel = sp.csr_matrix(
        (np.ones(flat.size), (np.arange(flat.size), flat)), shape=(flat.size, k * k)
    )
    return sel, flat


class CvxpyBackend:
    """Each LMI becomes a PSD slack S with upper triangle tied to F(x)."""

    name = "cvxpy"

    def build(self, program: ConicProgram) -> tuple[cp.Problem, cp.Variable]:
        x = cp.Variable(program.nvar)
        constraints = []
        for lmi in program.lmis:
            k = lmi.order
            sel, flat = _upper_selector(k)
            slack = cp.Variable((k, k), PSD=True)
            fmat = lmi.coeffs.reshape(program.nvar, k * k).T[flat]
            f0 = lmi.offset.reshape(k * k)[flat]
            constraints.append(sel @ cp.reshape(slack, (k * k,), order="C") == f0 + fmat @ x)
        objective = cp.Maximize(program.objective @ x + program.objective_offset)
        return cp.Problem(objective, constraints), x

    def solve(self, program: ConicProgram, cfg: SolverConfig) -> ConicSolution:
        problem, x = self.build(program)
        options = dict(cfg.solver_options)
        if cfg.max_iters is not None:
            options.setdefault(_MAX_ITER_KEY.get(cfg.solver.upper(), "max_iters"), cfg.max_iters)
        try:
            problem.solve(solver=cfg.solver, verbose=cfg.verbose, **options)
        except cp.error.SolverError as e:
            logger.warning("conic solver %s failed: %s", cfg.solver, e)
            return ConicSolution(x=None, status=SolverStatus.NUMERICAL_TROUBLE, objective=float("nan"))

        status = _CVXPY_STATUS.get(problem.status, SolverStatus.NUMERICAL_TROUBLE)
        logger.debug("cvxpy/%s status %s, value %s", cfg.solver, problem.status, problem.value)
        value = float(problem.value) if problem.value is not None else float("nan")
        xs = None if x.value is None else np.asarray(x.value, dtype=np.float64)
        return ConicSolution(x=xs, status=status, objective=value)


_BACKENDS: dict[str, Callable[[], ConicBackend]] = {"cvxpy": CvxpyBackend}


def register_backend(name: str, factory: Callable[[], ConicBackend]) -> None:
    _BACKENDS[name] = factory


def get_backend(cfg: SolverConfig) -> ConicBackend:
    try:
        return _BACKENDS[cfg.backend]()
    except KeyError:
        raise ConfigError(
            f"unknown conic backend {cfg.backend!r} (available: {sorted(_BACKENDS)})"
        ) from None
