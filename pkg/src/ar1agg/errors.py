"""Exception types shared across the package.

Exit-code mapping used by the CLI: ConfigError -> 2, NumericError -> 3,
BudgetError -> 4.
"""


class DomainError(ValueError):
    """An argument lies outside the mathematically admissible region."""


class NumericError(RuntimeError):
    """A numerical routine failed to reach its target accuracy."""

    def __init__(self, message: str, achieved_tol: float | None = None):
        super().__init__(message)
        self.achieved_tol = achieved_tol


class BudgetError(RuntimeError):
    """A simulation would exceed the configured resource budget."""


class ConfigError(ValueError):
    """Invalid run configuration."""
