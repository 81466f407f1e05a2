"""Finite-dimensional Hilbert complexes, sandwiched closed extensions and their index identities."""

from . import cli, hilbert, linrel, models, report, sandwich
from .hilbert import GradedSpace, HilbertComplex, PartialOperator
from .linrel import LinearRelation, Subspace, Tolerance
from .report import Check, ValidationReport
from .sandwich import DualityData, SandwichPair

__all__ = [
    "cli",
    "hilbert",
    "linrel",
    "models",
    "report",
    "sandwich",
    "GradedSpace",
    "HilbertComplex",
    "PartialOperator",
    "LinearRelation",
    "Subspace",
    "Tolerance",
    "Check",
    "ValidationReport",
    "DualityData",
    "SandwichPair",
]

__version__ = "0.1.0"
