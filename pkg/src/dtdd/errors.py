"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the region where a formula is valid."""


class ConvergenceError(ArithmeticError):
    """A series hit its term cap before meeting the stopping criterion."""


class NotInvertibleError(DomainError):
    """The SINR map is constant in distance (k = 1) and has no inverse."""
