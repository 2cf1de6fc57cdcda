class EntconError(Exception):
    pass


class DimensionMismatch(EntconError, ValueError):
    pass


class OutOfRange(EntconError, ValueError):
    pass


class NotHermitian(EntconError):
    pass


class NotUnitary(EntconError):
    pass


class InvalidChannel(EntconError):
    """Kraus operators violate the completeness relation."""


class InvalidState(EntconError):
    pass


class NoConvergence(EntconError, ArithmeticError):
    pass


class DegenerateDraw(EntconError):
    """The Gaussian draw behind a Haar sample kept collapsing to zero."""


class DegeneratePair(EntconError):
    """Two sampled states were too close to form a distance ratio."""


class DegenerateData(EntconError):
    pass


class ReproducibilityMismatch(EntconError):
    """A rerun with an already recorded configuration produced different output."""


class UsageError(EntconError):
    """Command-line options that cannot be combined or parsed."""


class OutputError(EntconError):
    """The output directory cannot hold the run's files."""
