"""Exception hierarchy shared across the package."""


class RobustBenchError(Exception):
    """Base class for all errors raised by this package."""


class ShapeMismatch(RobustBenchError, ValueError):
    pass


class LabelOutOfRange(RobustBenchError, ValueError):
    pass


class InvalidParameter(RobustBenchError, ValueError):
    pass


class DimensionMismatch(RobustBenchError, ValueError):
    pass


class ParseError(RobustBenchError, ValueError):
    """Raised for malformed model, dataset or config files.

    The message carries the offending line or field so the user can fix the
    file without a debugger.
    """


class MagicMismatch(ParseError):
    pass


class CountMismatch(ParseError):
    pass


class ConfigError(RobustBenchError, ValueError):
    pass


class AlreadyAdversarial(RobustBenchError):
    """The reference input already satisfies the criterion."""


class AttackError(RobustBenchError):
    """Base class for errors an attack can raise for a single sample.

    ``outcome`` holds the partial :class:`AttackOutcome` when one exists, so
    callers can still report query counts and tuned parameters.
    """

    def __init__(self, message="", outcome=None):
        super().__init__(message)
        self.outcome = outcome


class AttackFailed(AttackError):
    pass


class GradientZero(AttackError):
    pass


class DegenerateBoundary(AttackError):
    pass


class NotSpatialInput(AttackError):
    pass


class StartingPointNotFound(AttackError):
    pass


class InputNotInTable(AttackError):
    pass


class InvalidBracket(RobustBenchError, ValueError):
    pass
