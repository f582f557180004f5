"""Exception hierarchy shared by all modules."""


class SparseH2Error(Exception):
    """Base class for every error raised by this package."""


class ValidationError(SparseH2Error, ValueError):
    """Invalid input data or configuration."""


class AllColumnsConstant(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class DegenerateDesign(SparseH2Error):
    """Fixed-effect design spans the whole observation space."""


class NumericalError(SparseH2Error):
    """Base for failures of the estimation itself (CLI exit code 1)."""


class NonConvergence(NumericalError):
    """Coordinate descent hit ``max_iter``; ``best`` holds the last iterate."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class EmptySelection(NumericalError):
    """Stability selection kept no column at the requested threshold.

    ``result`` carries the full frequency table so callers can re-threshold.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class DegenerateLikelihood(NumericalError):
    pass


class EmptyTrueSupport(SparseH2Error, ValueError):
    pass
