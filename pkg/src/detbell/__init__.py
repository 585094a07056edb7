"""Exact determinant formulas indexed by partial partitions, and their companions."""

from .combinatorics import bell, bell_nk
from .det_formulas import FormulaKind, det_leibniz, det_main, evaluate
from .scalar import QQ, ZZ, Domain, Matrix, Scalar, parse_matrix, prime_field

__all__ = [
    "Domain",
    "FormulaKind",
    "Matrix",
    "QQ",
    "Scalar",
    "ZZ",
    "bell",
    "bell_nk",
    "det_leibniz",
    "det_main",
    "evaluate",
    "parse_matrix",
    "prime_field",
]

__version__ = "0.1.0"
