"""Exception hierarchy for physbound.

Everything derives from ``PhysboundError`` (a ``ValueError``) so callers can
catch bad-input failures in one place.
"""
from __future__ import annotations


class PhysboundError(ValueError):
    """Base class for all physbound errors."""


class DimensionError(PhysboundError):
    """Shapes or lengths of inputs do not agree."""


class FactorizationError(PhysboundError):
    """A design term cannot be factored (e.g. it is identically zero)."""


# ---------------------------------------------------------------------------
# Projector construction
# ---------------------------------------------------------------------------

class ProjectorError(PhysboundError):
    """A projector set cannot be built or used."""


class NotFullColumnRankError(ProjectorError):
    """The stacked U matrix is not full column rank."""

    def __init__(self, rank: int, columns: int):
        super().__init__(
            f"stacked U has rank {rank} but {columns} columns; "
            "the tightness condition requires full column rank"
        )
        self.rank = rank
        self.columns = columns


class NotMultiScenarioError(ProjectorError):
    """Terms are not disjoint standard-basis selectors."""


class NotRankOneError(ProjectorError):
    """At least one term has more than one column."""


class UnverifiedProjectorsError(ProjectorError):
    """A projector set failed verification but a verified one is required."""


# ---------------------------------------------------------------------------
# Guards, files, configuration
# ---------------------------------------------------------------------------

class GuardError(PhysboundError):
    """A desk-scale size guard was violated."""


class ProblemFileError(PhysboundError):
    """A problem document could not be parsed or validated."""

    def __init__(self, message: str, location: str | None = None):
        if location:
            super().__init__(f"{location}: {message}")
        else:
            super().__init__(message)
        self.location = location
        self.detail = message


class ConfigError(PhysboundError):
    """A configuration file is missing, unreadable or invalid."""
