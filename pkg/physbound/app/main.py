"""Command-line driver for physbound."""
from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence

from physbound import __version__
from physbound.app.commands import CommandRegistry, default_registry
from physbound.config import SOLVER_CFG_ENV
from physbound.export.report import write_report

APP_TITLE = "physbound"
LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


def build_parser(registry: CommandRegistry) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=APP_TITLE,
        description=(
            "Certified lower bounds for affine physical design problems. "
            "Reports go to stdout (or -o); logs go to stderr."
        ),
        epilog=(
            "exit codes: 0 success, 1 validation failure, 2 solver failure, "
            f"3 weak-duality violation. {SOLVER_CFG_ENV} names a default solver configuration."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logs"
    )
    registry.configure(parser)
    return parser


def _log_level(verbosity: int) -> int:
    if verbosity >= 2:
        return logging.DEBUG
    if verbosity == 1:
        return logging.INFO
    return logging.WARNING


def main(argv: Sequence[str] | None = None) -> int:
    registry = default_registry()
    args = build_parser(registry).parse_args(argv)
    logging.basicConfig(level=_log_level(args.verbose), format=LOG_FORMAT, stream=sys.stderr)

    result = registry.get(args.command).run(args)
    if result.reports is not None:
        write_report(result.reports, getattr(args, "output", None))
    return result.exit_code
