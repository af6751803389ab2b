"""Shared exception types.

Every error raised on purpose by this package derives from CrtwistError, so
callers can catch one base class.  The subclasses are deliberately small:
each one names a single mathematical or plumbing failure mode.
"""


class CrtwistError(Exception):
    """Base class for all errors raised by this package."""


class SingularMap(CrtwistError):
    """A projective change of variable has vanishing determinant."""


class ZeroPolynomial(CrtwistError):
    """The zero polynomial was passed where a nonzero one is required."""


class NonPositiveWeightSample(CrtwistError):
    """A weight function is not positive at the required sample point."""


class NonPositiveWeight(CrtwistError):
    """A weight evaluated to a non positive value at a probe point."""


class IncompatibleWeight(CrtwistError):
    """A weight vector has the wrong length or type for the given metric."""


class UnsupportedKind(CrtwistError):
    """The requested operation is not defined for this metric kind."""


class DegeneratePoint(CrtwistError):
    """A probe point makes the coordinate expressions degenerate."""


class DomainBoundary(CrtwistError):
    """A probe point is on or outside the domain of the metric."""


class DegenerateHessian(CrtwistError):
    """A potential has a singular Hessian where an inverse is needed."""


class WeightVanishes(CrtwistError):
    """A twist weight vanishes somewhere on the closed domain."""


class ZeroA0(CrtwistError):
    """A twist with a0 = 0 was requested where a0 != 0 is required."""


class Inconsistent(CrtwistError):
    """A linear system that should be solvable has no solution."""


class SingularSystem(CrtwistError):
    """A square linear system is singular."""


class BadParameters(CrtwistError):
    """Parameters violate a documented precondition."""


class SingularC(CrtwistError):
    """The ruled surface parameter c satisfies 3c^2 = 1."""


class NotCoprime(CrtwistError):
    """Join integers (k, n) fail the required coprimality."""


class BadRatio(CrtwistError):
    """A ratio parameter is outside its admissible range."""


class Mismatch(CrtwistError):
    """Two computations that must agree exactly do not."""


class SingularMetric(CrtwistError):
    """A metric matrix is singular (or numerically singular) at a point."""


class ParseError(CrtwistError):
    """Input text could not be parsed."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class SchemaError(CrtwistError):
    """Parsed input does not conform to the published schema."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column
