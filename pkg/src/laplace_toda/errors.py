"""Exception hierarchy shared by all modules."""


class LaplaceTodaError(Exception):
    """Base class for every error raised by the package."""


class NearVanishing(LaplaceTodaError):
    """A function that must be inverted comes within ``vanish_tol`` of zero."""


class FitDivergence(LaplaceTodaError):
    """A collocation refit did not reach ``fit_tol`` within the degree cap."""


class BranchFailure(LaplaceTodaError):
    """No continuous periodic N-th root of the invariant I(y) exists."""


class PoleAtOne(LaplaceTodaError):
    """The Floquet parameter rho is within ``pole_guard`` of 1."""


class IntegratorFailure(LaplaceTodaError):
    """The adaptive integrator could not meet its tolerance."""

    def __init__(self, message, y=None, h=None):
        super().__init__(message)
        self.y = y
        self.h = h


class DegeneratePeriods(LaplaceTodaError):
    """The period lattice violates delta < Delta and epsilon < Delta."""


class ZeroMultiplier(LaplaceTodaError):
    """A Floquet multiplier passed to a conversion is zero."""


class ZeroCoefficient(LaplaceTodaError):
    """A coefficient that must be inverted is zero."""


class DegenerateW(LaplaceTodaError):
    """A w-invariant is 0 or -1 where a Laplace/Toda step divides by it."""


class ZeroProduct(LaplaceTodaError):
    """A row or column coefficient product used as a denominator is zero."""


class MismatchReport(LaplaceTodaError):
    """An identity expected to hold exactly does not; carries the first difference."""

    def __init__(self, message, detail=None):
        super().__init__(message)
        self.detail = detail


class OffCurve(LaplaceTodaError):
    """A point passed as a spectral-curve point does not satisfy R = 0."""


class SingularPoint(LaplaceTodaError):
    """The psi-ratio denominator vanishes at the requested curve point."""


class IncompatibleField(LaplaceTodaError):
    """A w-field fails the chain compatibility needed for g-reconstruction."""


class ParseError(LaplaceTodaError):
    """An operator/field/config file could not be parsed."""
