"""Exception hierarchy shared by all modules."""


class MixPhaseError(Exception):
    pass


class NotHermitian(MixPhaseError, ValueError):
    pass


class DegenerateSpectrum(MixPhaseError, ValueError):
    pass


class DimensionMismatch(MixPhaseError, ValueError):
    pass


class InvalidState(MixPhaseError, ValueError):
    """A density operator or decomposition failed construction checks."""


class MalformedEmbedding(MixPhaseError, ValueError):
    pass


class GridMismatch(MixPhaseError, ValueError):
    pass


class InvalidPath(MixPhaseError, ValueError):
    pass


class UndefinedPhase(MixPhaseError, ArithmeticError):
    """The complex amplitude is too small for its argument to mean anything.

    The offending :class:`~mixphase.phases.PhaseResult` is attached as
    ``result`` so callers can still report the magnitude.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class IndexOutOfRange(MixPhaseError, IndexError):
    pass


class MissingGenerator(MixPhaseError, ValueError):
    pass


class ScenarioError(MixPhaseError):
    exit_code = 1


class ParseError(ScenarioError):
    exit_code = 2


class ValidationError(ScenarioError):
    exit_code = 3
