"""Exception types shared across the package."""


class ContractViolationError(ValueError):
    """Inputs violate a documented precondition (bad shapes, invalid distributions)."""


class CapacityError(RuntimeError):
    """A computation would exceed a configured size cap."""


class InfeasibleRateError(RuntimeError):
    """The requested rate cannot support the given coding scheme."""


class InfeasibleDecompositionError(RuntimeError):
    """No auxiliary-variable decomposition met the feasibility tolerance."""


class GameFileError(ValueError):
    """A game or scheme file failed to parse or validate."""
