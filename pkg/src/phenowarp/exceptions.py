"""Exception hierarchy shared by all phenowarp modules."""


class PhenowarpError(Exception):
    """Base class for every error raised by this package."""


class SchemaError(PhenowarpError, ValueError):
    """Input file is missing required columns or has an unexpected header."""


class ValidationError(PhenowarpError, ValueError):
    """A record violates a field-level invariant (range, enum, type)."""

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class ConflictError(PhenowarpError, ValueError):
    """Duplicate keys in a table that must be unique."""


class DomainError(PhenowarpError, ValueError):
    """A numeric formula was evaluated outside its domain."""


class ParameterError(PhenowarpError, ValueError):
    """An algorithm parameter is out of its admissible range."""


class CoverageError(PhenowarpError, ValueError):
    """A series does not cover the requested time span."""


class EmptyIntersectionError(PhenowarpError, ValueError):
    """Calendars of different years share no common interval."""


class UnfillableError(PhenowarpError, ValueError):
    """A series has no clear sample to fill cloudy gaps from."""


class NoPathError(PhenowarpError, ValueError):
    """No finite warping path exists inside the band."""


class UnclassifiableError(PhenowarpError, ValueError):
    """Every candidate distance is non-finite."""


class InsufficientSamplesError(PhenowarpError, ValueError):
    """A class has fewer samples than requested for training."""
