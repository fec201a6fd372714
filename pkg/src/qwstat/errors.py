"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the mathematical domain of an operation.

    Typical causes are a vanishing coin entry where a transfer matrix has to
    divide by it, or an eigenvalue that is not on the unit circle.
    """


class IllConditionedWarning(RuntimeWarning):
    """A transfer matrix is close to singular."""
