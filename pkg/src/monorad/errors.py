"""Exception hierarchy shared by every stage of the pipeline."""


class MonoradError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 3


class ParseError(MonoradError, ValueError):
    exit_code = 2

    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class NumericFailure(MonoradError):
    exit_code = 3


class RootFindingError(NumericFailure):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class NearBranchLocus(NumericFailure):
    """The requested point is (numerically) on the branch locus."""


class StepCollapse(NumericFailure):
    """Path tracking needed a step below the minimum step length."""


class AmbiguousMatching(NumericFailure):
    pass


class SliceExhausted(NumericFailure):
    pass


class NonStabilized(NumericFailure):
    pass


class EigenCheckFailed(NumericFailure):
    pass


class NoFit(NumericFailure):
    pass


class CapExceeded(MonoradError):
    exit_code = 4


class NotNormal(MonoradError, ValueError):
    pass


class NotAbelian(MonoradError, ValueError):
    pass


class PreconditionError(MonoradError, ValueError):
    pass


class VerificationFailed(MonoradError):
    exit_code = 5

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
