"""Exception types shared across the package.

The CLI maps these onto distinct exit codes, so solver code should raise
the most specific type that applies rather than bare ValueError.
"""


class ConfigurationError(ValueError):
    """A scene, grid, or experiment description is invalid."""


class ContractError(ValueError):
    """Inputs violate an operation's contract (shape, kind, or frequency mismatch)."""


class SingularityError(ValueError):
    """A kernel was evaluated at zero distance or on coincident planes."""


class SolverError(RuntimeError):
    """An iterative solver failed (divergence, non-finite values).

    May carry a ``report`` attribute with partial results gathered before
    the failure.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
