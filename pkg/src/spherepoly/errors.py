"""Exception types raised by the package."""


class SpherePolyError(Exception):
    """Base class for all package errors."""


class DegenerateInput(SpherePolyError, ValueError):
    """Points are affinely dependent (all within tolerance of a hyperplane)."""


class DimensionOutOfRange(SpherePolyError, ValueError):
    pass


class DegenerateFacet(SpherePolyError, ValueError):
    """Facet vertices do not span an (n-1)-simplex."""


class NonPositiveDensity(SpherePolyError, ValueError):
    pass


class RejectionStall(SpherePolyError, RuntimeError):
    """Too many consecutive rejections; the density's upper bound is wrong."""


class OutOfRange(SpherePolyError, ValueError):
    pass


class TooManyDegenerate(SpherePolyError, RuntimeError):
    pass


class InsufficientPrecision(SpherePolyError, ValueError):
    """Report means are too noisy (or too few) for a rate fit."""
