"""Exception hierarchy shared by all subpackages."""


class ExtensionError(Exception):
    """Base class for errors raised by seeleyext."""


class PrecisionError(ExtensionError):
    """Working precision or truncation is too small for the requested tolerance."""


class ContractionError(ExtensionError):
    """The coefficient fixed-point iteration stopped contracting."""


class MomentValidationError(ExtensionError):
    """A synthesized family failed its post-hoc moment validation.

    The offending family and report are attached so callers can inspect them.
    """

    def __init__(self, message, family=None, report=None):
        super().__init__(message)
        self.family = family
        self.report = report


class ConditioningError(ExtensionError):
    """Closed-form and linear-solve coefficient paths disagree."""


class DuplicateNodeError(ExtensionError, ValueError):
    """Vandermonde nodes are not distinct."""


class OutOfRangeError(ExtensionError):
    """A reflected ray point left the sampled grid under the 'error' policy."""


class TailCertificateError(ExtensionError):
    """The truncated reflection sum cannot be certified for the declared growth."""


class TubularInverseError(ExtensionError):
    """Nearest-point projection onto the boundary curve failed."""


class WitnessError(ExtensionError):
    """A negative-order decomposition witness does not reproduce its target."""


class DomainError(ExtensionError, ValueError):
    """A boundary curve violates regularity, simplicity or reach requirements."""
