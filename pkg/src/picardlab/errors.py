"""Exception hierarchy shared by the numerical and exact layers."""

from __future__ import annotations


class PicardLabError(Exception):
    """Base class for all package errors."""


class ValidationError(PicardLabError, ValueError):
    """A configuration violates one of its declared invariants."""


class DuplicatePoles(ValidationError):
    pass


class InvalidIndex(ValidationError):
    pass


class InadmissiblePoint(ValidationError):
    pass


class BadInitialBranch(ValidationError):
    pass


class GeometryError(PicardLabError):
    """Base for path-construction failures."""


class PathHitsBasePoint(GeometryError):
    pass


class GeometryInfeasible(GeometryError):
    pass


class SingularityOnPath(GeometryError):
    pass


class NumericalError(PicardLabError, ArithmeticError):
    """Base for tolerance / convergence failures."""


class NonFiniteSample(NumericalError):
    pass


class QuadratureNotConverged(NumericalError):
    pass


class SeriesDiverges(NumericalError):
    pass


class MaxTermsExceeded(NumericalError):
    pass


class BranchNotClosed(NumericalError):
    pass


class NoClearGap(NumericalError):
    pass
