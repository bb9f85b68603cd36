"""Exception hierarchy shared by all modules."""


class ReliabilityError(Exception):
    """Base class for every error raised by relsens."""


class InvalidMoments(ReliabilityError, ValueError):
    pass


class DomainError(ReliabilityError, ValueError):
    pass


class InvalidProbability(ReliabilityError, ValueError):
    pass


class OutOfRange(ReliabilityError, ValueError):
    pass


class NotPositiveDefinite(ReliabilityError, ValueError):
    pass


class NumericalFailure(ReliabilityError):
    """Errors the CLI reports with the numerical-failure exit code."""


class NoConvergence(NumericalFailure):
    pass


class GradientFailure(NumericalFailure):
    pass


class AllSafe(NumericalFailure):
    pass


class NonFiniteValue(NumericalFailure, ValueError):
    pass


class NonFiniteLimitState(NonFiniteValue):
    def __init__(self, index, value):
        self.index = int(index)
        self.value = value
        super().__init__(f"limit state is not finite at sample {self.index}: {value!r}")


class DegenerateWeights(NumericalFailure):
    pass


class DegenerateVariance(ReliabilityError, ValueError):
    pass


class ZeroVector(ReliabilityError, ValueError):
    pass


class EmptyCoefficients(ReliabilityError, ValueError):
    pass


class InvalidStep(ReliabilityError, ValueError):
    pass


class EmptyBatch(ReliabilityError, ValueError):
    pass


class ParseError(ReliabilityError, ValueError):
    def __init__(self, message, position=None):
        self.position = position
        self.message = message
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}")


class UnknownIdentifier(ParseError):
    def __init__(self, name, position=None):
        self.name = name
        super().__init__(f"unknown identifier {name!r}", position)


class EvaluationError(ReliabilityError, ArithmeticError):
    pass


class ConfigError(ReliabilityError, ValueError):
    """Invalid analysis configuration; ``field`` is a dotted path into the file."""

    def __init__(self, field, message, line=None):
        self.field = field
        self.line = line
        self.message = message
        loc = field if line is None else f"{field} (line {line})"
        super().__init__(f"{loc}: {message}")


class StudyError(ReliabilityError):
    def __init__(self, run, cause):
        self.run = run
        self.cause = cause
        super().__init__(f"run {run} failed: {type(cause).__name__}: {cause}")


class IndexOutOfRange(ReliabilityError, IndexError):
    pass
