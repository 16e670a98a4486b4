"""Exception types shared across the package."""


class DomainError(ValueError):
    """A well-formed request that violates a mathematical precondition.

    The CLI maps this to exit status 1.
    """


class GuardError(DomainError):
    """An instance exceeds the size guard of an enumeration oracle."""
