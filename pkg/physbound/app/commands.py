"""Command objects for the CLI.

Each command registers its own sub-parser and turns parsed arguments into a
``CommandResult``: a report (or list of reports for batch runs) plus an exit
code. Library errors are caught here and reported, never re-raised.
"""
from __future__ import annotations

import argparse
import logging
import time
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from physbound import __version__
from physbound.assets.generate import InstanceKind, generate_instance
from physbound.config import SaddleConfig, SolverConfig, load_solver_config
from physbound.dual.backends import SolverStatus
from physbound.dual.bound import BoundReport, solve_bound
from physbound.dual.lagrangian import DualMode
from physbound.dual.program import build_dual_sdp
from physbound.errors import PhysboundError
from physbound.export.report import (
    BoundSection,
    HeuristicSection,
    OracleSection,
    ProjectorSection,
    ReportDocument,
    ValidationSection,
    WeakDualitySection,
)
from physbound.heuristic.saddle import run_saddle
from physbound.oracle.enumeration import (
    MAX_GRID_TERMS,
    OracleResult,
    brute_force_boolean,
    grid_search_interval,
    verify_weak_duality,
)
from physbound.problem.factorization import stack_terms
from physbound.problem.models import Domain, ProblemInstance
from physbound.problem.physics import validate_objective, validate_problem
from physbound.problem.serialization import load_problem, save_problem, serialize_problem
from physbound.projectors.construction import construct_projectors
from physbound.projectors.models import ProjectorMethod, ProjectorSet
from physbound.sets.membership import recover_theta, violation_for
from physbound.util.paths import atomic_write_text, digest_file, iter_problem_files

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_SOLVER = 2
EXIT_WEAK_DUALITY = 3

DEFAULT_GRID_POINTS = 101


@dataclass
class CommandResult:
    reports: ReportDocument | list[ReportDocument] | None
    exit_code: int = EXIT_OK


@dataclass
class _Run:
    """Mutable state of one command run on one file."""
    command: str
    path: str | None = None
    timings: dict[str, float] = field(default_factory=dict)
    sections: dict[str, object] = field(default_factory=dict)

    def timed(self, stage: str, fn, *args, **kwargs):
        start = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        finally:
            self.timings[stage] = time.perf_counter() - start

    def report(self, exit_code: int, error: str | None = None) -> ReportDocument:
        return ReportDocument(
            tool_version=__version__,
            command=self.command,
            input=self.path,
            input_digest=digest_file(self.path) if self.path and Path(self.path).is_file() else None,
            exit_code=exit_code,
            error=error,
            timings=self.timings,
            **self.sections,
        )


# ---------------------------------------------------------------------------
# Pipeline stages shared by commands
# ---------------------------------------------------------------------------

def _validation_section(instance: ProblemInstance) -> ValidationSection:
    problem = instance.problem
    messages = validate_problem(problem)
    messages += validate_objective(instance.objective, problem.n)
    if not messages:
        stacked = stack_terms(problem.terms)
        if not stacked.full_column_rank:
            messages.append(
                f"stacked U: rank {stacked.rank} with {stacked.columns} columns "
                f"(m = {problem.m}); full column rank is required"
            )
    return ValidationSection(
        valid=not messages, messages=messages, reconstruction=list(instance.reconstruction)
    )


def _mode(args: argparse.Namespace, instance: ProblemInstance) -> DualMode:
    if getattr(args, "mode", None):
        return DualMode(args.mode)
    return DualMode.for_domain(instance.problem.domain)


def _oracle(
    instance: ProblemInstance, mode: DualMode, grid: int | None, jobs: int
) -> tuple[OracleResult, OracleSection]:
    """Boolean enumeration for Boolean bounds; a grid for interval bounds.

    Interval bounds with d > 3 are checked against Boolean enumeration, which
    is still an upper bound on the interval optimum.
    """
    problem, obj = instance.problem, instance.objective
    if mode is DualMode.INTERVAL_PSD and problem.d <= MAX_GRID_TERMS:
        points = grid or DEFAULT_GRID_POINTS
        result = grid_search_interval(problem, obj, points, jobs=jobs)
        return result, OracleSection.from_result(result, "grid", points)
    result = brute_force_boolean(problem, obj, jobs=jobs)
    return result, OracleSection.from_result(result, "boolean")


def _bound_exit(report: BoundReport) -> int:
    return EXIT_OK if report.solver_status is SolverStatus.OPTIMAL else EXIT_SOLVER


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

class Command(ABC):
    """Base class for CLI commands."""

    name: str = ""
    help: str = ""

    def configure(self, subparsers: argparse._SubParsersAction) -> argparse.ArgumentParser:
        parser = subparsers.add_parser(self.name, help=self.help, description=self.help)
        self.add_arguments(parser)
        parser.set_defaults(command=self.name)
        return parser

    @abstractmethod
    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        ...

    @abstractmethod
    def run(self, args: argparse.Namespace) -> CommandResult:
        ...


class _FileCommand(Command):
    """A command that reads one problem file and runs a pipeline on it."""

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("file", help="problem file (JSON)")
        parser.add_argument("-o", "--output", help="write the report here instead of stdout")

    def run(self, args: argparse.Namespace) -> CommandResult:
        report = self.run_file(args.file, args)
        return CommandResult(reports=report, exit_code=report.exit_code)

    def run_file(self, path: str, args: argparse.Namespace) -> ReportDocument:
        run = _Run(command=self.name, path=path)
        try:
            instance = run.timed("load", load_problem, path)
            exit_code = self.pipeline(run, instance, args)
        except PhysboundError as e:
            logger.error("%s: %s", path, e)
            return run.report(EXIT_VALIDATION, error=str(e))
        return run.report(exit_code)

    @abstractmethod
    def pipeline(self, run: _Run, instance: ProblemInstance, args: argparse.Namespace) -> int:
        ...

    @staticmethod
    def validated(run: _Run, instance: ProblemInstance) -> bool:
        section = run.timed("validate", _validation_section, instance)
        run.sections["validation"] = section
        for msg in section.messages:
            logger.error("%s", msg)
        return section.valid

    @staticmethod
    def projectors(run: _Run, instance: ProblemInstance, args: argparse.Namespace) -> ProjectorSet:
        method = ProjectorMethod(getattr(args, "method", None) or ProjectorMethod.INVERSE_COMPLETION.value)
        ps = run.timed("project", construct_projectors, instance.problem, method)
        run.sections["projector"] = ProjectorSection.from_set(ps)
        return ps


def _add_solver_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--mode", choices=[m.value for m in DualMode],
        help="dual mode (default: from the problem's domain)",
    )
    parser.add_argument(
        "--solver-cfg",
        help="solver configuration JSON (default: $PHYSBOUND_SOLVER_CFG, then built-in defaults)",
    )
    parser.add_argument(
        "--method", choices=[m.value for m in ProjectorMethod],
        default=ProjectorMethod.INVERSE_COMPLETION.value, help="projector construction",
    )


class ValidateCommand(_FileCommand):
    name = "validate"
    help = "parse a problem file and check its dimension and rank invariants"

    def pipeline(self, run: _Run, instance: ProblemInstance, args: argparse.Namespace) -> int:
        return EXIT_OK if self.validated(run, instance) else EXIT_VALIDATION


class ProjectCommand(_FileCommand):
    name = "project"
    help = "construct the projector set and report its condition residuals"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        super().add_arguments(parser)
        parser.add_argument(
            "--method", choices=[m.value for m in ProjectorMethod],
            default=ProjectorMethod.INVERSE_COMPLETION.value,
        )

    def pipeline(self, run: _Run, instance: ProblemInstance, args: argparse.Namespace) -> int:
        if not self.validated(run, instance):
            return EXIT_VALIDATION
        ps = self.projectors(run, instance, args)
        return EXIT_OK if ps.verified else EXIT_VALIDATION


class BoundCommand(_FileCommand):
    name = "bound"
    help = "solve the dual semidefinite program for a certified lower bound"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        super().add_arguments(parser)
        _add_solver_arguments(parser)
        parser.add_argument("--export-sdp", help="also write the dual program in SDPA sparse format")

    def bound(
        self, run: _Run, instance: ProblemInstance, args: argparse.Namespace
    ) -> tuple[BoundReport, DualMode] | None:
        if not self.validated(run, instance):
            return None
        ps = self.projectors(run, instance, args)
        cfg: SolverConfig = load_solver_config(args.solver_cfg)
        mode = _mode(args, instance)
        problem, obj = instance.problem, instance.objective
        program = None
        if getattr(args, "export_sdp", None) and ps.verified:
            program = run.timed("assemble", build_dual_sdp, problem, ps, obj, mode)
            atomic_write_text(args.export_sdp, program.to_sdpa())
        report = run.timed("solve", solve_bound, problem, ps, obj, mode, cfg, program)
        return report, mode

    def pipeline(self, run: _Run, instance: ProblemInstance, args: argparse.Namespace) -> int:
        result = self.bound(run, instance, args)
        if result is None:
            return EXIT_VALIDATION
        report, mode = result
        run.sections["bound"] = BoundSection.from_report(report, mode.value)
        return _bound_exit(report)


class OracleCommand(_FileCommand):
    name = "oracle"
    help = "brute-force primal value (Boolean enumeration or interval grid)"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        super().add_arguments(parser)
        parser.add_argument(
            "--grid", type=int,
            help=f"grid points per axis; forces the interval grid (default {DEFAULT_GRID_POINTS})",
        )
        parser.add_argument("--jobs", type=int, default=1, help="worker threads")

    def pipeline(self, run: _Run, instance: ProblemInstance, args: argparse.Namespace) -> int:
        if not self.validated(run, instance):
            return EXIT_VALIDATION
        problem, obj = instance.problem, instance.objective
        if args.grid is not None or problem.domain is Domain.INTERVAL:
            points = args.grid or DEFAULT_GRID_POINTS
            result = run.timed("oracle", grid_search_interval, problem, obj, points, jobs=args.jobs)
            run.sections["oracle"] = OracleSection.from_result(result, "grid", points)
        else:
            result = run.timed("oracle", brute_force_boolean, problem, obj, jobs=args.jobs)
            run.sections["oracle"] = OracleSection.from_result(result, "boolean")
        return EXIT_OK


class HeuristicCommand(_FileCommand):
    name = "heuristic"
    help = "run gradient descent-ascent on the Lagrangian"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        super().add_arguments(parser)
        defaults = SaddleConfig()
        parser.add_argument("--iters", type=int, default=defaults.iterations)
        parser.add_argument("--seed", type=int, default=defaults.seed)
        parser.add_argument("--step-primal", type=float, default=defaults.step_primal)
        parser.add_argument("--step-dual", type=float, default=defaults.step_dual)
        parser.add_argument(
            "--init-scale", type=float, default=defaults.init_scale,
            help="scale of a seeded random starting field (0 starts from z = 0)",
        )
        parser.add_argument(
            "--method", choices=[m.value for m in ProjectorMethod],
            default=ProjectorMethod.INVERSE_COMPLETION.value,
        )

    def pipeline(self, run: _Run, instance: ProblemInstance, args: argparse.Namespace) -> int:
        if not self.validated(run, instance):
            return EXIT_VALIDATION
        ps = self.projectors(run, instance, args)
        cfg = SaddleConfig(
            iterations=args.iters, seed=args.seed, step_primal=args.step_primal,
            step_dual=args.step_dual, init_scale=args.init_scale,
        )
        problem, obj = instance.problem, instance.objective
        result = run.timed("saddle", run_saddle, problem, ps, obj, cfg)
        viol = violation_for(result.z_best, problem, ps)
        theta = recover_theta(result.z_best, problem, ps).theta
        run.sections["heuristic"] = HeuristicSection.from_result(
            result,
            primal_value=obj(result.z_best),
            set_violation=viol.worst(),
            recovered_theta=[float(t) for t in theta],
        )
        return EXIT_SOLVER if result.diverged else EXIT_OK


class CertifyCommand(BoundCommand):
    name = "certify"
    help = "bound + oracle + weak-duality check; accepts a file or a directory of files"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("file", help="problem file, or a directory of *.json problem files")
        parser.add_argument("-o", "--output", help="write the report here instead of stdout")
        _add_solver_arguments(parser)
        parser.add_argument("--grid", type=int, help="grid points per axis for interval oracles")
        parser.add_argument("--jobs", type=int, default=1, help="files certified in parallel")

    def run(self, args: argparse.Namespace) -> CommandResult:
        if not Path(args.file).is_dir():
            return super().run(args)
        files = [str(p) for p in iter_problem_files(args.file)]
        if args.jobs > 1:
            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                reports = list(pool.map(lambda f: self.run_file(f, args), files))
        else:
            reports = [self.run_file(f, args) for f in files]
        exit_code = max((r.exit_code for r in reports), default=EXIT_OK)
        return CommandResult(reports=reports, exit_code=exit_code)

    def pipeline(self, run: _Run, instance: ProblemInstance, args: argparse.Namespace) -> int:
        result = self.bound(run, instance, args)
        if result is None:
            return EXIT_VALIDATION
        report, mode = result
        oracle, section = run.timed("oracle", _oracle, instance, mode, args.grid, 1)
        run.sections["oracle"] = section
        report = report.with_oracle(oracle.p_star)
        run.sections["bound"] = BoundSection.from_report(report, mode.value)
        check = verify_weak_duality(report, oracle)
        run.sections["weak_duality"] = WeakDualitySection.from_check(check)
        if not check.passed:
            return EXIT_WEAK_DUALITY
        return _bound_exit(report)


class GenerateCommand(Command):
    name = "gen"
    help = "generate a seeded test instance"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("kind", choices=[k.value for k in InstanceKind])
        parser.add_argument("--m", type=int, default=4, help="rows of A0 (square, n = m)")
        parser.add_argument("--d", type=int, default=2, help="number of design terms")
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument(
            "--block-size", type=int, default=1,
            help="columns per term (multi_scenario_diag only)",
        )
        parser.add_argument("--domain", choices=[d.value for d in Domain], default="interval")
        parser.add_argument("--hexfloat", action="store_true", help="write bit-exact hex floats")
        parser.add_argument("-o", "--output", help="problem file to write (default stdout)")

    def run(self, args: argparse.Namespace) -> CommandResult:
        # -o names the problem file here, so errors only go to the log
        try:
            instance = generate_instance(
                args.kind, args.m, args.d,
                seed=args.seed, block_size=args.block_size, domain=args.domain,
            )
        except PhysboundError as e:
            logger.error("%s", e)
            return CommandResult(reports=None, exit_code=EXIT_VALIDATION)
        if args.output:
            save_problem(instance, args.output, hexfloat=args.hexfloat)
            return CommandResult(reports=None)
        print(serialize_problem(instance, hexfloat=args.hexfloat), end="")
        return CommandResult(reports=None)


class CommandRegistry:
    """Name -> command lookup, in registration order."""

    def __init__(self) -> None:
        self.commands: dict[str, Command] = {}

    def register(self, cmd: Command) -> None:
        self.commands[cmd.name] = cmd

    def configure(self, parser: argparse.ArgumentParser) -> None:
        sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
        for cmd in self.commands.values():
            cmd.configure(sub)

    def get(self, name: str) -> Command:
        return self.commands[name]


def default_registry() -> CommandRegistry:
    registry = CommandRegistry()
    for cmd in (
        ValidateCommand(),
        ProjectCommand(),
        BoundCommand(),
        OracleCommand(),
        HeuristicCommand(),
        CertifyCommand(),
        GenerateCommand(),
    ):
        registry.register(cmd)
    return registry
