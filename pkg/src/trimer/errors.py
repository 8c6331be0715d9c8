"""Exception hierarchy shared by all modules.

Every exception carries an ``exit_code`` used by the command-line front end.
"""


class TrimerError(Exception):
    exit_code = 2


class UsageError(TrimerError, ValueError):
    """Bad configuration: missing key, malformed value, unknown command."""

    exit_code = 1


class DomainError(TrimerError, ValueError):
    exit_code = 1


class NumericError(TrimerError, ArithmeticError):
    exit_code = 2


class IntegrationError(NumericError):
    """The adaptive integrator gave up; ``time`` is where it stopped."""

    def __init__(self, message, time):
        super().__init__(f"{message} (t = {time:.6g})")
        self.time = time


class AccuracyError(NumericError):
    pass


class DegenerateCoefficientsError(NumericError):
    pass


class PreconditionError(NumericError):
    pass


class CoverageError(NumericError):
    pass


class ResonanceError(TrimerError, ArithmeticError):
    """U0/omega is (numerically) an integer, where the Bessel sums diverge."""

    exit_code = 3
