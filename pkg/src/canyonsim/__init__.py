"""Single-bounce GNSS multipath simulation in procedurally generated urban canyons."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("canyonsim")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .errors import (  # noqa: E402
    CanyonSimError,
    DegenerateDistributionError,
    DegenerateGeometryError,
    InsufficientDataError,
    ParameterError,
    SingularFitError,
)

__all__ = [
    "__version__",
    "CanyonSimError",
    "DegenerateDistributionError",
    "DegenerateGeometryError",
    "InsufficientDataError",
    "ParameterError",
    "SingularFitError",
]
