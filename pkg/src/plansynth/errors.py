"""Shared exception hierarchy.

Input-shaped problems (bad files, bad labels, missing data) raise
:class:`PlanSynthError` subclasses and map to CLI exit code 2; broken
internal invariants raise :class:`InvariantViolation` and map to exit
code 3.
"""


class PlanSynthError(Exception):
    """Base class for all recoverable, input-shaped errors."""


class InvariantViolation(PlanSynthError):
    """An internal consistency guarantee was broken. Always a bug."""
