"""Exception hierarchy.

Every error raised by the toolkit derives from :class:`BIAError` so callers
(and the CLI exit-code mapping) can catch the family at once.
"""

from __future__ import annotations

from typing import Any


class BIAError(Exception):
    """Base class for all toolkit errors."""


class InfeasibleParams(BIAError, ValueError):
    """Raised when (K, r, mode) violates a construction inequality."""


class ConstructionError(BIAError):
    """The combinatorial construction produced an inconsistent object."""


class DimensionMismatch(BIAError, ValueError):
    """Inputs built from different scheme parameters were combined."""


class CheckFailure(BIAError):
    """A verification check failed; ``report`` holds the offending report."""

    def __init__(self, message: str, report: Any = None):
        super().__init__(message)
        self.report = report


class LemmaViolation(CheckFailure):
    pass


class DecodabilityError(CheckFailure):
    pass


class CensusError(CheckFailure):
    pass


class ConverseAuditError(CheckFailure):
    pass


class MathIntegrityError(BIAError):
    """A closed-form identity that must always hold did not."""
