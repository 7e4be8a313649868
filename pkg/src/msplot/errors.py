"""Exception hierarchy shared across the package.

Two branches matter operationally: :class:`InputError` (malformed or
unsuitable input) and :class:`NumericalError` (a computation degenerated on
data that validated fine).  The CLI maps the branches to distinct exit codes.
"""


class MSPlotError(Exception):
    """Base class for all errors raised by this package."""


class InputError(MSPlotError):
    """Input is malformed, inconsistent, or outside a precondition."""


class NumericalError(MSPlotError):
    """A numerical procedure degenerated (singularity, zero spread, ...)."""


# -- data model -------------------------------------------------------------

class InvalidGrid(InputError):
    """Grid violates its invariants (too few points, bad weights, ...)."""


class ShapeMismatch(InputError):
    """Array dimensions are inconsistent with each other."""


class NonFiniteValue(InputError):
    """A NaN or infinity was found where a finite value is required."""


class DuplicateId(InputError):
    """Curve labels are not distinct."""


# -- point-wise outlyingness ------------------------------------------------

class DegenerateCrossSection(NumericalError):
    """A grid cross-section has zero spread; outlyingness is undefined."""


class DegenerateSample(NumericalError):
    """Every projection direction has zero MAD for this cross-section."""


class UseClosedForm(InputError):
    """Random directions were requested for univariate data (p = 1)."""


# -- robust detection -------------------------------------------------------

class SingularScatter(NumericalError):
    """A (subset) covariance matrix is singular."""


class InsufficientData(InputError):
    """Too few observations for the requested robust fit."""


class NoBoundaryGeometry(InputError):
    """No boundary geometry exists for this dimension."""


# -- simulation ------------------------------------------------------------

class UnknownModel(InputError):
    """Simulation model id is not one of 1..5."""


class NotPositiveDefinite(NumericalError):
    """Covariance factorization failed even after the jitter ladder."""


class DomainError(InputError):
    """Argument outside the mathematical domain of a special function."""


# -- plots ------------------------------------------------------------------

class ArrayNeedsMultivariate(InputError):
    """The plot array is only defined for p >= 2 response dimensions."""


# -- file I/O ---------------------------------------------------------------

class ParseError(InputError):
    """Input text could not be parsed."""


class RaggedGrid(InputError):
    """Curves in a long CSV are not observed on one common grid."""
