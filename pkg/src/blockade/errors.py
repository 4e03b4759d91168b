"""Exception hierarchy shared by all blockade modules."""


class BlockadeError(Exception):
    """Base class for every error raised by this package."""


class NotHermitian(BlockadeError, ValueError):
    pass


class NoConvergence(BlockadeError, ArithmeticError):
    pass


class Singular(BlockadeError, ArithmeticError):
    pass


class DimensionMismatch(BlockadeError, ValueError):
    pass


class PositivityViolation(BlockadeError, ArithmeticError):
    """Raised when a computed state has a clearly negative eigenvalue.

    Usually a sign that the Fock truncation is too small.
    """


class StepTooLarge(BlockadeError, ValueError):
    pass


class NoPhotons(BlockadeError, ZeroDivisionError):
    """The cavity is (numerically) empty, so photon correlations are 0/0."""


class ZeroChi(BlockadeError, ValueError):
    pass


class TruncationTooSmall(BlockadeError, ValueError):
    pass


class ConfigError(BlockadeError, ValueError):
    pass
