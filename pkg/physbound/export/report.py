"""ReportFile: the JSON document every CLI command emits."""
from __future__ import annotations

import os
import sys

from pydantic import BaseModel, ConfigDict, Field

from physbound.dual.bound import BoundReport
from physbound.heuristic.saddle import SaddleResult
from physbound.oracle.enumeration import OracleResult, WeakDualityCheck
from physbound.projectors.models import ProjectorSet
from physbound.util.paths import atomic_write_text


class _Section(BaseModel):
    # non-finite floats are written as "Infinity", "-Infinity", "NaN"
    model_config = ConfigDict(frozen=True, extra="forbid", ser_json_inf_nan="strings")


class ValidationSection(_Section):
    valid: bool
    messages: list[str] = Field(default_factory=list)
    # spectral error of each term factored from a dense A_i, None for factored terms
    reconstruction: list[float | None] = Field(default_factory=list)


class ProjectorSection(_Section):
    method: str
    verified: bool
    cross: float
    zero_block: float
    partition: float
    sizes: list[int]
    m0: int

    @classmethod
    def from_set(cls, ps: ProjectorSet) -> ProjectorSection:
        r = ps.residuals
        return cls(
            method=ps.method.value, verified=ps.verified, cross=r.cross,
            zero_block=r.zero_block, partition=r.partition, sizes=list(ps.sizes), m0=ps.m0,
        )


class BoundSection(_Section):
    mode: str
    d_star: float
    solver_status: str
    schur_slack: float
    solver_objective: float
    backoff: float
    p_star: float | None = None
    gap: float | None = None

    @classmethod
    def from_report(cls, report: BoundReport, mode: str) -> BoundSection:
        return cls(
            mode=mode,
            d_star=report.d_star,
            solver_status=report.solver_status.value,
            schur_slack=report.schur_slack,
            solver_objective=report.solver_objective,
            backoff=report.backoff,
            p_star=report.p_star,
            gap=report.gap,
        )


class OracleSection(_Section):
    kind: str  # "boolean" enumeration or "grid"
    p_star: float
    argmin_theta: list[float] | None
    evaluated_count: int
    points_per_axis: int | None = None

    @classmethod
    def from_result(
        cls, result: OracleResult, kind: str, points_per_axis: int | None = None
    ) -> OracleSection:
        theta = None if result.argmin_theta is None else [float(t) for t in result.argmin_theta]
        return cls(
            kind=kind, p_star=result.p_star, argmin_theta=theta,
            evaluated_count=result.evaluated_count, points_per_axis=points_per_axis,
        )


class WeakDualitySection(_Section):
    passed: bool
    margin: float
    vacuous: bool

    @classmethod
    def from_check(cls, check: WeakDualityCheck) -> WeakDualitySection:
        return cls(passed=check.passed, margin=check.margin, vacuous=check.vacuous)


class HeuristicSection(_Section):
    iterations: int
    diverged: bool
    primal_value: float
    set_violation: float
    # best finite dual value over the iterates
    dual_value: float
    # dual value at the last iterate
    final_dual_value: float
    final_lagrangian: float | None
    z_best: list[float]
    recovered_theta: list[float]

    @classmethod
    def from_result(
        cls,
        result: SaddleResult,
        primal_value: float,
        set_violation: float,
        recovered_theta: list[float],
    ) -> HeuristicSection:
        return cls(
            iterations=result.iterations,
            diverged=result.diverged,
            primal_value=primal_value,
            set_violation=set_violation,
            dual_value=result.g_incumbent,
            final_dual_value=result.g_final,
            final_lagrangian=result.l_trace[-1] if result.l_trace else None,
            z_best=[float(x) for x in result.z_best],
            recovered_theta=recovered_theta,
        )


class ReportDocument(_Section):
    tool_version: str
    command: str
    input: str | None = None
    input_digest: str | None = None
    exit_code: int = 0
    error: str | None = None
    timings: dict[str, float] = Field(default_factory=dict)
    validation: ValidationSection | None = None
    projector: ProjectorSection | None = None
    bound: BoundSection | None = None
    oracle: OracleSection | None = None
    weak_duality: WeakDualitySection | None = None
    heuristic: HeuristicSection | None = None


def render_reports(reports: ReportDocument | list[ReportDocument]) -> str:
    if isinstance(reports, ReportDocument):
        return reports.model_dump_json(indent=2, exclude_none=True) + "\n"
    body = ",\n".join(r.model_dump_json(indent=2, exclude_none=True) for r in reports)
    return "[\n" + body + "\n]\n"


def write_report(
    reports: ReportDocument | list[ReportDocument], output_path: str | None = None
) -> str | None:
    """Write to ``output_path`` atomically, or to stdout when it is None."""
    text = render_reports(reports)
    if output_path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return None
    return atomic_write_text(os.path.abspath(output_path), text)
