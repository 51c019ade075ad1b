"""Aggregation of random-coefficient AR(1) panels with infinitely divisible
innovations: simulation, limit theory, and density disaggregation."""

from .errors import BudgetError, ConfigError, DomainError, NumericError

__version__ = "0.1.0"

__all__ = [
    "BudgetError",
    "ConfigError",
    "DomainError",
    "NumericError",
    "__version__",
]
