"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class SizeError(ValueError):
    """A requested enumeration is too large to carry out."""
