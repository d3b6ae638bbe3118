"""Arbitrary-precision Kronecker-Eisenstein lattice sums, elliptic Dedekind
sums, and Hecke L-value denominators for imaginary quadratic fields."""
from __future__ import annotations

from .numerics import (
    DEFAULT_BITS,
    DomainError,
    PoleError,
    PrecisionContext,
    PrecisionUnderflowError,
    RandomStream,
    RecognitionFailure,
    UnsupportedFieldError,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_BITS",
    "DomainError",
    "PoleError",
    "PrecisionContext",
    "PrecisionUnderflowError",
    "RandomStream",
    "RecognitionFailure",
    "UnsupportedFieldError",
    "__version__",
]
