"""Scalar substrates: periodic functions of y, rationals, bivariate polynomials."""
from .bipoly import (BivariatePolynomial, Rational, as_rational, cofactor,
                     evaluate_matrix, poly_det, univariate)
from .fourier import (DriftFunction, PeriodicFunction, exp, log, log_derivative,
                      nth_root, pf_derivative, pf_eval, pf_log_derivative,
                      pf_mean_integral, pf_mul, pf_reciprocal, reciprocal,
                      winding_number)

__all__ = [
    "BivariatePolynomial", "Rational", "as_rational", "cofactor", "evaluate_matrix",
    "poly_det", "univariate", "DriftFunction", "PeriodicFunction", "exp", "log",
    "log_derivative", "nth_root", "pf_derivative", "pf_eval", "pf_log_derivative",
    "pf_mean_integral", "pf_mul", "pf_reciprocal", "reciprocal", "winding_number",
]
