"""Exception hierarchy shared across the package.

Every error raised by wclim derives from :class:`WclimError` so callers can
catch the whole family; the service layer maps subclasses to stable HTTP
error codes.
"""


class WclimError(Exception):
    """Base class for all wclim errors."""


class DomainError(WclimError):
    """An input value lies outside the mathematical domain of an operation."""


class ShapeError(WclimError):
    """Array or grid dimensions are incompatible with the operation."""


class AlignmentError(WclimError):
    """Two grids cannot be brought onto a common frame."""


class EmptyGeometryError(WclimError):
    """A geometry has zero area after cleaning."""


class KeyCollisionError(WclimError):
    """Two records share an identifier that must be unique."""


class ValidationError(WclimError):
    """Input data violates a declared invariant (negative weights, bad DN)."""


class UnsupportedPeriodError(WclimError):
    """A requested time lies outside the supported period."""


class FrequencyError(WclimError):
    """A series has the wrong time frequency for the operation."""


class CoverageError(WclimError):
    """A time axis does not cover complete calendar periods."""


class UnsupportedAggregationError(WclimError):
    """The variable kind forbids the requested temporal aggregation."""


class ConfigurationError(WclimError):
    """A required input (weight layer, data file) is not configured."""


class IngestionError(WclimError):
    """A data file could not be interpreted."""


class BoundaryError(WclimError):
    """A boundary file or feature is malformed."""


class QueryError(WclimError):
    """A query is invalid; carries a stable machine-readable code."""

    def __init__(self, code: str, message: str, status: int = 400):
        super().__init__(message)
        self.code = code
        self.status = status
