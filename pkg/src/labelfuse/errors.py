"""Exception hierarchy shared by all labelfuse modules."""

from __future__ import annotations


class LabelfuseError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(LabelfuseError, ValueError):
    """A configuration value is out of range or malformed."""


class DomainError(LabelfuseError, ValueError):
    """A bound was evaluated outside the domain of its formula."""


class BudgetError(LabelfuseError, ValueError):
    """A teacher was asked to label more instances than its budget allows."""


class ConsistencyViolation(LabelfuseError):
    """Teacher answers contradict the class-consistency assumption.

    Raised when two super-nodes already known to differ are asked to merge,
    or when two members of one super-node are reported as different.
    ``pair`` holds the two offending instance ids.
    """

    def __init__(self, message: str, pair: tuple[int, int] | None = None, kind: str = ""):
        super().__init__(message)
        self.pair = pair
        self.kind = kind


class IntegrityError(LabelfuseError):
    """A simulated run produced a partition that does not match ground truth."""
