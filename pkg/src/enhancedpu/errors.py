"""Exception hierarchy shared across the package."""


class PUError(Exception):
    """Base class for every error raised by enhancedpu."""


class DimensionMismatch(PUError, ValueError):
    pass


class NotPositiveDefinite(PUError, ValueError):
    pass


class InvalidLabel(PUError, ValueError):
    pass


class ScarViolation(PUError, ValueError):
    """A labeled example (s=1) has ground truth y=0."""


class DegenerateLabels(PUError, ValueError):
    pass


class SeparationDetected(PUError, RuntimeError):
    pass


class SingularHessian(PUError, RuntimeError):
    pass


class NoLabeledExamples(PUError, ValueError):
    pass


class ZeroDirection(PUError, ValueError):
    pass


class COutOfRange(PUError, ValueError):
    pass


class AllRestartsFailed(PUError, RuntimeError):
    pass


class LengthMismatch(PUError, ValueError):
    pass


class SingleClassTruth(PUError, ValueError):
    pass


class ZeroVector(PUError, ValueError):
    pass


class ParseError(PUError, ValueError):
    pass


class NonNumericFeature(PUError, ValueError):
    pass


class MissingColumn(PUError, KeyError):
    pass


class ConstantFeature(PUError, ValueError):
    pass


class MissingTruth(PUError, ValueError):
    pass


class EmptySplit(PUError, ValueError):
    pass


class ConfigError(PUError, ValueError):
    """Invalid experiment configuration; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
