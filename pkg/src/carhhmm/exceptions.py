class DomainError(ValueError):
    """An argument lies outside the domain where a map is defined."""


class SingularChainError(ArithmeticError):
    """A transition matrix has no unique stationary distribution."""
