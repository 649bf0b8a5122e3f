"""Computable separable metric spaces with exact rational arithmetic.

Subpackages are plain modules: ``numerics``, ``reals``, ``metric``,
``completion``, ``canonical``, ``urysohn``, ``representations`` and ``cli``.
"""

from .errors import CMetricError, ContractError, DomainError, InvariantError, ParseError, SearchBoundError

__version__ = "0.1.0"

__all__ = [
    "CMetricError",
    "ContractError",
    "DomainError",
    "InvariantError",
    "ParseError",
    "SearchBoundError",
]
