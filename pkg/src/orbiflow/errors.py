"""Exception hierarchy shared by all modules."""


class OrbiflowError(Exception):
    """Base class for every error raised by this package."""


class CutLocus(OrbiflowError):
    pass


class DegeneratePlane(OrbiflowError):
    pass


class DimensionMismatch(OrbiflowError):
    pass


class BoundaryViolation(OrbiflowError):
    pass


class TruncationTooLarge(OrbiflowError):
    pass


class PoleAtJ(OrbiflowError):
    pass


class PreconditionViolated(OrbiflowError):
    pass


class NotConvex(OrbiflowError):
    pass


class OutOfRange(OrbiflowError):
    pass


class StepTooLarge(OrbiflowError):
    pass


class SingularProfile(OrbiflowError):
    pass


class CFLViolation(OrbiflowError):
    pass


class LostConvexity(OrbiflowError):
    """Minimum principal curvature became non-positive during a flow."""


class IncompleteRun(OrbiflowError):
    pass


class ConfigError(OrbiflowError):
    """Invalid experiment configuration; ``fields`` maps field -> message."""

    def __init__(self, message, fields=None):
        super().__init__(message)
        self.fields = dict(fields or {})


class ExperimentError(OrbiflowError):
    """A module error raised inside an experiment, tagged with its name."""

    def __init__(self, experiment, cause):
        super().__init__(f"{experiment}: {type(cause).__name__}: {cause}")
        self.experiment = experiment
        self.cause = cause
