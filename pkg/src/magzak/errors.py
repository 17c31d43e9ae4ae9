"""Exception types shared across the package."""


class MagzakError(Exception):
    """Base class for all package errors."""


class NonFinite(MagzakError):
    """A field contains NaN or Inf coefficients."""


class NonZeroMean(MagzakError):
    """A negative-order operation was applied to a field with nonzero mean."""


class GridMismatch(MagzakError):
    """Two fields (or a field and a grid) do not share the same grid."""


class ImaginaryResidue(MagzakError):
    """A quantity that must be real carries an imaginary part above tolerance."""


class DomainError(MagzakError):
    """An argument lies outside its admissible domain."""


class NonContraction(MagzakError):
    """The fixed-point iteration stopped contracting; shrink the window."""


class MaxIterExceeded(MagzakError):
    """An iteration hit its iteration cap before converging."""


class QuadratureUnderflow(MagzakError):
    """A quadrature step was requested with a nonpositive step size."""


class NoConvergence(MagzakError):
    """An iterative solver stalled above its residual tolerance."""


class BoundaryContamination(MagzakError):
    """A localized profile does not decay below tolerance at the torus boundary."""


class ExponentMismatch(MagzakError):
    """Lebesgue exponents violate the required Hoelder scaling relation."""


class BlowUp(MagzakError):
    """A trajectory norm crossed the blow-up detection threshold."""


class PhysicsFailure(MagzakError):
    """Wrapper for run-time physics failures (used by the CLI exit-code logic)."""


class ParseError(MagzakError):
    """Configuration text could not be parsed."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + loc)
        self.line = line
        self.column = column


class ValidationError(MagzakError):
    """A parsed configuration value violates its domain."""


class UnknownGenerator(MagzakError):
    """The requested initial-data generator does not exist."""


class SnapshotVersionMismatch(MagzakError):
    """A snapshot file has an unexpected magic string or record type."""
