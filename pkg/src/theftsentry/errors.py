"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: configuration problems exit 2, data
problems exit 3, and internal invariant violations exit 4.
"""


class TheftSentryError(Exception):
    """Base class for all package errors."""


class ConfigError(TheftSentryError):
    """Bad run configuration: unknown method, unresolvable path, invalid flag."""


class DataError(TheftSentryError):
    """Base class for problems with input data."""


class ParseError(DataError):
    """A CSV/JSON input could not be parsed; carries file and line context."""

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        loc = ""
        if path is not None:
            loc += f"{path}"
        if line is not None:
            loc += f":{line}"
        super().__init__(f"{loc}: {message}" if loc else message)
        self.path = path
        self.line = line


class ShapeError(DataError):
    """Rows, days or profiles do not agree on (m, T)."""


class DomainError(DataError):
    """A value is outside its allowed domain (negative reading, non-finite)."""


class ParameterError(TheftSentryError):
    """An operation was called with parameters that violate its preconditions."""


class DegeneratePartitionError(ParameterError):
    """Too few distinct values to build the requested axis partition."""


class DegenerateDataError(DataError):
    """Data collapsed to a single point / all-zero distances; no structure left."""


class MetricError(TheftSentryError):
    """A metric is undefined for the given labels (e.g. one class is empty)."""


class InternalError(TheftSentryError):
    """An internal invariant was violated; indicates a bug, not a user error."""
