"""Exception types shared across the package."""

from __future__ import annotations


class TwistlabError(Exception):
    """Base class for all library errors."""


class DomainError(TwistlabError, ValueError):
    """Arguments outside the mathematical domain of an operation."""


class ValidationError(TwistlabError, ValueError):
    """Input data failed a structural or numerical validity test."""


class ConfigurationError(TwistlabError, ValueError):
    """A built-in construction is numerically inconsistent."""


class UnsupportedModelError(TwistlabError, ValueError):
    """The operation is not defined for this group model."""


class DegenerateFitError(TwistlabError, ValueError):
    """Too little usable data for a regression."""


class ConstantsRequiredError(TwistlabError, ValueError):
    """A formula needs constants that only the caller can supply."""


class DiscretizationError(TwistlabError, RuntimeError):
    """A quadrature or grid approximation did not converge."""


class CapacityError(TwistlabError, RuntimeError):
    """A memory or size budget was exceeded.

    ``completed`` carries the largest radius (or step) finished before the
    budget ran out, and ``partial`` any partial results worth keeping.
    """

    def __init__(self, message: str, completed: int | None = None, partial: object = None):
        super().__init__(message)
        self.completed = completed
        self.partial = partial


class SchemaError(ValidationError):
    """A document does not match its JSON schema; ``pointer`` locates the field."""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


class UnwritablePathError(TwistlabError, OSError):
    """An output location cannot be written."""
