"""Exact verification of second-order Leibniz-type operator relations.

Finite rings are checked by brute force, polynomial function spaces by exact
symbolic identity checking.
"""

from .poly import Polynomial, RationalFunction, parse_polynomial
from .polyfunc import A_apply, Box, OperatorSpec, SmoothnessError, T_apply
from .recovery import FitResult, classify
from .report import SCHEMA, VerificationReport
from .rings import Modular, Product, Quotient, Ring, make_ring, parse_ring

__version__ = "0.1.0"

__all__ = [
    "A_apply", "Box", "FitResult", "Modular", "OperatorSpec", "Polynomial", "Product", "Quotient",
    "RationalFunction", "Ring", "SCHEMA", "SmoothnessError", "T_apply", "VerificationReport", "classify",
    "make_ring", "parse_polynomial", "parse_ring",
]
