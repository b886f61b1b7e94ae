"""translab: desk-scale experiments in linear dynamics.

Operator models with exact powers, hitting-time sets judged against
Furstenberg families on finite windows, and witness checkers for the
transitivity criteria.
"""
from .errors import (
    ConfigError,
    DichotomyInconclusive,
    HorizonMismatch,
    ParameterError,
    TranslabError,
    UnsupportedOperation,
    WitnessNotFound,
)
from .kernels import BACKEND
from .vectors import LP2, SparseVector, Space, poly_space

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfigError",
    "DichotomyInconclusive",
    "HorizonMismatch",
    "LP2",
    "ParameterError",
    "SparseVector",
    "Space",
    "TranslabError",
    "UnsupportedOperation",
    "WitnessNotFound",
    "__version__",
    "poly_space",
]
