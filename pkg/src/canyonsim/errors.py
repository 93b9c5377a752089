"""Exception types raised across the package."""


class CanyonSimError(Exception):
    """Base class for all package errors."""


class ParameterError(CanyonSimError, ValueError):
    """An input parameter is out of range or not finite."""


class DegenerateGeometryError(CanyonSimError, ValueError):
    """Geometry is degenerate (e.g. coincident points)."""


class InsufficientDataError(CanyonSimError, ValueError):
    pass


class DegenerateDistributionError(CanyonSimError, ValueError):
    pass


class SingularFitError(CanyonSimError, ValueError):
    pass
