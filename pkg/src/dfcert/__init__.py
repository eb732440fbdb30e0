"""Certified roots of square systems mixing polynomials and D-finite functions.

Two certificates are offered: an interval Krawczyk test over a box and an
alpha-theory test at a point.  Both rely on rigorous evaluation of D-finite
functions (solutions of linear ODEs with polynomial coefficients).
"""

from .alpha import AlphaCertificate, alpha_test, radius_search
from .dfinite import DFiniteFunction, eval_box, eval_deriv_point, eval_point
from .interval import ComplexInterval, IntervalBox, IntervalMatrix, RealInterval, working_precision
from .krawczyk import KrawczykCertificate, krawczyk_test, refine_root
from .parsing import load_system
from .system import IngredientRow, IngredientSystem, MultivariatePolynomial

__all__ = [
    "AlphaCertificate", "ComplexInterval", "DFiniteFunction", "IngredientRow", "IngredientSystem",
    "IntervalBox", "IntervalMatrix", "KrawczykCertificate", "MultivariatePolynomial", "RealInterval",
    "alpha_test", "eval_box", "eval_deriv_point", "eval_point", "krawczyk_test", "load_system",
    "radius_search", "refine_root", "working_precision",
]
