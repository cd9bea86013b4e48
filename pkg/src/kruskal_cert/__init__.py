"""Exact uniqueness certificates for tensor rank decompositions."""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    BudgetExceeded,
    EnumerationCapError,
    FamilyFormatError,
    GenerationFailure,
    KruskalCertError,
    ParameterError,
)
from .field import GF, QQ, Field
from .tensor import ProductFamily, ProductTensor, SymmetricFamily

__all__ = [
    "__version__",
    "Field",
    "GF",
    "QQ",
    "ProductTensor",
    "ProductFamily",
    "SymmetricFamily",
    "KruskalCertError",
    "ParameterError",
    "EnumerationCapError",
    "BudgetExceeded",
    "GenerationFailure",
    "FamilyFormatError",
]
