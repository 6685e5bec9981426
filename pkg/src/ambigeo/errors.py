"""Exception hierarchy shared across the package.

``AmbigeoError`` is the common base; ``UserInputError`` marks problems the
CLI reports with exit code 2 (bad files, bad flags) as opposed to internal
failures.
"""


class AmbigeoError(Exception):
    """Base class for all errors raised by this package."""


class UserInputError(AmbigeoError):
    """Malformed or inconsistent user-supplied input (CLI exit code 2)."""


class FormatError(AmbigeoError):
    """A byte stream does not conform to the expected container layout."""


class TruncationError(FormatError):
    """Declared payload size disagrees with the bytes actually present."""


class ValidationError(AmbigeoError):
    """Data violates a structural invariant (NaN payloads, bad counts)."""


class ShapeError(AmbigeoError):
    """Operands have incompatible dimensions or lengths."""


class DomainError(AmbigeoError):
    """A value lies outside the mathematical domain of an operation."""


class InsufficientDataError(AmbigeoError):
    """Too few observations to compute the requested statistic."""


class SingularMatrixError(AmbigeoError):
    """A design matrix is rank deficient."""


class EmptyDatasetError(AmbigeoError):
    """An operation produced or received a dataset with zero rows."""


class DegenerateInputError(AmbigeoError):
    """Input is degenerate in a way the algorithm refuses to repair."""


class ConvergenceError(AmbigeoError):
    """An iterative solver failed to reach its stated tolerance."""


class SplitError(AmbigeoError):
    """A train/test split would leave one side empty."""


class UnknownClassError(AmbigeoError):
    """A label was requested that the fitted model has never seen."""


class ReservedLabelError(AmbigeoError):
    """An operation attempted to produce the reserved label 'other'."""


class UndefinedAlphaError(AmbigeoError):
    """Inter-rater agreement is undefined (expected disagreement is zero)."""


class ConfigError(AmbigeoError):
    """A configuration object fails its own consistency rules."""
