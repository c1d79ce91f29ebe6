"""Numerical tolerances and run configuration.

All thresholds are relative, scale-free ``a * (1 + |.|)`` forms unless a
field says otherwise. Defaults match the operation contracts; override them
by passing a model instance or by loading a JSON solver configuration.
"""
from __future__ import annotations

import json
import logging
import os
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from physbound.errors import ConfigError

logger = logging.getLogger(__name__)

SOLVER_CFG_ENV = "PHYSBOUND_SOLVER_CFG"


class Tolerances(BaseModel):
    """Every numerical threshold used by the library."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    # field solves: ||A(theta) z - b|| <= solve * (1 + ||b||)
    solve: float = Field(default=1e-10, ge=0)
    # relative singular-value cutoff for numerical rank
    rank: float = Field(default=1e-10, ge=0)
    factor: float = Field(default=1e-10, ge=0)
    # projector conditions, a set is verified iff all residuals <= verify
    verify: float = Field(default=1e-8, ge=0)
    psd: float = Field(default=1e-10, ge=0)
    # u must be orthogonal to the nullspace of T to this relative level
    range: float = Field(default=1e-8, ge=0)
    pinv: float = Field(default=1e-10, ge=0)
    membership: float = Field(default=1e-9, ge=0)
    degenerate: float = Field(default=1e-12, ge=0)
    collinear: float = Field(default=1e-9, ge=0)
    weak_duality: float = Field(default=1e-6, ge=0)
    certificate: float = Field(default=1e-5, ge=0)


DEFAULT_TOLERANCES = Tolerances()


class SolverConfig(BaseModel):
    """Configuration of the conic backend used by ``solve_bound``."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    backend: str = "cvxpy"
    solver: str = "CLARABEL"
    verbose: bool = False
    max_iters: int | None = Field(default=None, gt=0)
    solver_options: dict[str, Any] = Field(default_factory=dict)
    # shrink factors tried when the decoded dual point is marginally infeasible
    backoff: tuple[float, ...] = (
        1.0 - 1e-9, 1.0 - 1e-8, 1.0 - 1e-7, 1.0 - 1e-6,
        1.0 - 1e-5, 1.0 - 1e-4, 1.0 - 1e-3,
    )
    tolerances: Tolerances = Field(default_factory=Tolerances)


class SaddleConfig(BaseModel):
    """Free parameters of the gradient descent-ascent heuristic."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    step_primal: float = Field(default=0.05, gt=0)
    step_dual: float = Field(default=0.05, gt=0)
    iterations: int = Field(default=2000, gt=0)
    psd_projection_tol: float = Field(default=1e-10, ge=0)
    seed: int = 0
    # weight of the set violation when ranking primal candidates
    penalty: float = Field(default=1e3, ge=0)
    # 0 starts from z = 0; otherwise z0 ~ init_scale * N(0, I) from seed
    init_scale: float = Field(default=0.0, ge=0)
    divergence_limit: float = Field(default=1e12, gt=0)


def load_solver_config(path: str | None = None) -> SolverConfig:
    """Load a solver configuration from JSON.

    Falls back to ``$PHYSBOUND_SOLVER_CFG`` and then to defaults.
    """
    path = path or os.environ.get(SOLVER_CFG_ENV) or None
    if path is None:
        return SolverConfig()
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read solver configuration {path!r}: {e}") from e
    try:
        cfg = SolverConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid solver configuration {path!r}: {e}") from e
    logger.debug("loaded solver configuration from %s", path)
    return cfg
