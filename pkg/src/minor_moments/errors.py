"""Exception and warning types shared across the package."""


class NumericalError(Exception):
    """A computation failed for numerical reasons (singularity, loss of positivity)."""


class NotPositiveDefiniteError(NumericalError):
    """A matrix required to be symmetric positive definite is not."""


class SingularMatrixError(NumericalError):
    """A matrix required to be invertible is numerically singular."""


class FormulaExtrapolationWarning(UserWarning):
    """A closed-form moment was evaluated with fewer degrees of freedom than the
    ambient dimension.  The formula remains a polynomial identity in the degrees
    of freedom, but the sampling model it describes requires df >= dimension."""
