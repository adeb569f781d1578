"""BSD invariants and p-part certificates for elliptic curves over Q of
analytic rank 0 or 1."""

from .curve import CurveModel, RationalPoint, minimize, torsion_subgroup
from .errors import BSDCertError
from .io import CurveRecord, RunConfig, parse_curve_file
from .local import conductor, local_data

__version__ = "0.1.0"

__all__ = [
    "BSDCertError",
    "CurveModel",
    "CurveRecord",
    "RationalPoint",
    "RunConfig",
    "conductor",
    "local_data",
    "minimize",
    "parse_curve_file",
    "torsion_subgroup",
]
