"""Exception types shared across the package.

Every failure mode that callers are expected to branch on gets its own
class; the CLI reports the class name as the machine-parseable error tag.
"""


class TorsionLabError(Exception):
    """Base class for all package-specific errors."""


# -- algebra ---------------------------------------------------------------

class DivisionByZero(TorsionLabError):
    pass


class NonSquare(TorsionLabError):
    pass


class InterpolationIllConditioned(TorsionLabError):
    """Interpolated determinant failed its residual probe; raise precision."""


# -- knots -----------------------------------------------------------------

class InvalidFraction(TorsionLabError):
    pass


class UnknownKnot(TorsionLabError):
    pass


# -- reps ------------------------------------------------------------------

class DegenerateParameter(TorsionLabError):
    pass


class ContinuationStalled(TorsionLabError):
    """Path following could not complete; carries the partial result."""

    def __init__(self, message, last_good_index=-1, partial=None):
        super().__init__(message)
        self.last_good_index = last_good_index
        self.partial = partial


# -- torsion ---------------------------------------------------------------

class DenominatorVanishes(TorsionLabError):
    pass


class AllColumnsVanish(TorsionLabError):
    """Every column deletion yields a vanishing determinant: the twisted
    homology is nonzero and the torsion polynomial is zero."""


class NotAComplex(TorsionLabError):
    pass


class HomologyBasisMismatch(TorsionLabError):
    pass


# -- torsion polynomial normalization ---------------------------------------

class OddSpan(TorsionLabError):
    pass


class AsymmetricResult(TorsionLabError):
    pass


class InexactDivision(TorsionLabError):
    pass


class ZeroPolynomial(TorsionLabError):
    pass
