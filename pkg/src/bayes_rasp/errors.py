"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class InvalidSampleError(ValueError):
    """A censored sample violates the Type-I hybrid censoring invariants."""


class DivergenceError(ArithmeticError):
    """A requested moment or expectation does not exist for the given prior."""

    def __init__(self, message: str, term: str | None = None):
        super().__init__(message)
        self.term = term


class ScenarioError(ValueError):
    """A scenario or data file failed validation."""
