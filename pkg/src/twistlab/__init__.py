"""Quadratic twist L-value experiments."""

from .coefficients import CoefficientTable, coefficient_table, symmetric_square_L
from .curve import CurveModel, SplittingClass, classify_splitting_field, default_curve
from .discriminants import TwistClass, admissible_classes, enumerate_class
from .gauss import gauss_G_bruteforce, gauss_G_closed, poisson_identity_residual
from .lvalues import SmoothCutoff, central_value, central_values
from .moments import (charsum_average, first_moment, gaussian_moment, logL_distribution, pc_moments,
                      pd_moments, power_moment_ratio)
from .reports import DistributionReport, MomentReport

__all__ = [
    "CoefficientTable", "CurveModel", "DistributionReport", "MomentReport", "SmoothCutoff",
    "SplittingClass", "TwistClass", "admissible_classes", "central_value", "central_values",
    "charsum_average", "classify_splitting_field", "coefficient_table", "default_curve",
    "enumerate_class", "first_moment", "gauss_G_bruteforce", "gauss_G_closed", "gaussian_moment",
    "logL_distribution", "pc_moments", "pd_moments", "poisson_identity_residual",
    "symmetric_square_L", "power_moment_ratio",
]
