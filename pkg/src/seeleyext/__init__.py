"""Universal Seeley-type extension operators for the half-space and planar domains."""

__version__ = "0.1.0"

from .precision import PrecisionContext  # noqa: E402
from .coeffs import (  # noqa: E402
    BoundarySequence,
    CoefficientFamily,
    MomentReport,
    dyadic_finite_coefficients,
    fixed_point_coefficients,
    moment_report,
    seeley_one_sided_coefficients,
    vandermonde_coefficients,
)

__all__ = [
    "PrecisionContext",
    "BoundarySequence",
    "CoefficientFamily",
    "MomentReport",
    "dyadic_finite_coefficients",
    "fixed_point_coefficients",
    "moment_report",
    "seeley_one_sided_coefficients",
    "vandermonde_coefficients",
]
