"""Exception hierarchy for descred."""


class DescredError(Exception):
    """Base class for every error raised by this package."""


class ComputationError(DescredError):
    """A numerical kernel failed (SVD non-convergence, overflow, ...)."""


class RankError(DescredError, ValueError):
    """A matrix expected to have full column rank does not."""


class SingularError(DescredError, ValueError):
    """A matrix that must be inverted is singular at the working tolerance."""

    def __init__(self, message, cond=float("inf")):
        super().__init__(f"{message} (condition estimate {cond:.3e})")
        self.cond = cond


class NotRegularError(DescredError, ValueError):
    """The pencil (E, A) is singular: det(sE - A) vanishes identically."""


class PureSystemError(DescredError, ValueError):
    """The system is a pure descriptor system (F nilpotent)."""

    def __init__(self, message="pure descriptor system: only the zero solution"):
        super().__init__(message)


class NoFastPartError(DescredError, ValueError):
    """E is nonsingular, so there is no nilpotent (fast) subsystem."""


class NoInputError(DescredError, ValueError):
    """An operation on forced systems was called without an input matrix B."""


class ZeroMatrixError(DescredError, ValueError):
    pass


class BasisMismatchError(DescredError, ValueError):
    """A user-supplied basis does not span the required subspace."""


class DimensionError(DescredError, ValueError):
    pass


class NilpotencyError(DescredError, ValueError):
    pass


class ReducedIndexError(DescredError, ValueError):
    """A trajectory check needs an index-zero reduced system."""


class CommonRangeError(DescredError, ValueError):
    """Switched modes do not share the range of F_i^{k_i}."""

    def __init__(self, report):
        super().__init__(str(report))
        self.report = report


class ParseError(DescredError, ValueError):
    pass


class SchemaError(DescredError, ValueError):
    pass
