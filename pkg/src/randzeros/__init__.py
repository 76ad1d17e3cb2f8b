"""Random polynomials built on asymptotically minimal bases."""
from ._backend import NAME as BACKEND
from .bases import Basis, build_basis, minimality_report
from .ensembles import make_distribution, sample_G
from .errors import (
    CapabilityError,
    ConfigError,
    IterationLimitError,
    PartialResultError,
    RandZerosError,
    RankError,
    UndefinedStatisticError,
    ValidationError,
)
from .logarray import LogComplexArray
from .rootfinding import roots, zero_measure
from .supports import build_support, equilibrium_oracle, reference_measure

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Basis", "build_basis", "minimality_report", "make_distribution", "sample_G",
    "CapabilityError", "ConfigError", "IterationLimitError", "PartialResultError",
    "RandZerosError", "RankError", "UndefinedStatisticError", "ValidationError",
    "LogComplexArray", "roots", "zero_measure", "build_support", "equilibrium_oracle",
    "reference_measure", "__version__",
]
