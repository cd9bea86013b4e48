"""Exception classes shared by the engines and the command line."""

from __future__ import annotations

__all__ = [
    "KruskalCertError",
    "ParameterError",
    "EnumerationCapError",
    "BudgetExceeded",
    "GenerationFailure",
    "FamilyFormatError",
]


class KruskalCertError(Exception):
    """Base class for all package errors."""


class ParameterError(KruskalCertError, ValueError):
    """Input outside the domain of an operation (wrong m, bad q/s/r, ...)."""


class EnumerationCapError(ParameterError):
    """A full subset enumeration would exceed the configured cap."""


class BudgetExceeded(KruskalCertError):
    """A brute-force search ran past its budget.

    ``lower_bound`` carries whatever the search established before stopping.
    """

    def __init__(self, message: str, lower_bound: int | None = None, consumed: int | None = None):
        super().__init__(message)
        self.lower_bound = lower_bound
        self.consumed = consumed


class GenerationFailure(KruskalCertError):
    """A randomized generator exhausted its attempts."""

    def __init__(self, message: str, attempts: int = 0):
        super().__init__(message)
        self.attempts = attempts


class FamilyFormatError(KruskalCertError, ValueError):
    """Malformed family or certificate file."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        where = path or "<input>"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line
