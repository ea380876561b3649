class StructuralError(ValueError):
    """A box or table does not have the shape an operation needs."""


class GuardError(ValueError):
    """A size guard was hit (combinatorial or LP blow-up)."""


class InputError(ValueError):
    """A numeric argument is outside its admissible range."""


class SolverError(RuntimeError):
    """The LP solver failed or returned an inconsistent certificate."""


class InsufficientDataError(ValueError):
    """Not enough rounds of the required kind for a statistical estimate."""
