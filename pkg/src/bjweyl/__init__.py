"""Spectral toolkit for semi-infinite block tridiagonal Hermitian operators.

Core objects: block parameter families, interpolated seminorms, the
three-term recurrence solvers, transfer matrices, the matrix Weyl function,
atomic matrix measures and the nonsubordinacy diagnostics.
"""

from .blockcore import (
    BlockMatSeq,
    BlockVecSeq,
    JacobiParams,
    ParamsError,
    make_family,
    validate_params,
)
from .seminorms import SeminormKind, seminorm
from .solutions import compute_PQ, solve_forward
from .weyl import boundary_scan, weyl_resolvent, weyl_schur

__version__ = "0.1.0"

__all__ = [
    "BlockMatSeq",
    "BlockVecSeq",
    "JacobiParams",
    "ParamsError",
    "SeminormKind",
    "boundary_scan",
    "compute_PQ",
    "make_family",
    "seminorm",
    "solve_forward",
    "validate_params",
    "weyl_resolvent",
    "weyl_schur",
    "__version__",
]
