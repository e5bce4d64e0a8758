"""Simultaneous rational number codes over prime-power moduli."""

from .numtheory import PrimePowerBasis
from .code import (
    CodeParams,
    ErrorLocator,
    FractionVector,
    MultiPrecisionWord,
    ReceivedWord,
    encode,
    encode_multiprecision,
)

__all__ = [
    "PrimePowerBasis",
    "CodeParams",
    "ErrorLocator",
    "FractionVector",
    "MultiPrecisionWord",
    "ReceivedWord",
    "encode",
    "encode_multiprecision",
]

__version__ = "0.1.0"
