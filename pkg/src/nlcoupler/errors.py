"""Exception hierarchy shared across the package."""


class CouplerError(Exception):
    """Base class for every error raised by nlcoupler."""


class BasisMismatchError(CouplerError, ValueError):
    pass


class DegenerateStateError(CouplerError, ValueError):
    """The state (or a weighted integral of states) has zero norm.

    Typically means no photon pairs are generated, e.g. ``gamma == 0``.
    """


class NormalizationError(CouplerError, ValueError):
    pass


class PhysicalityError(CouplerError, ValueError):
    """A density matrix is not Hermitian, not PSD or not trace one."""


class DomainError(CouplerError, ValueError):
    pass


class GridError(CouplerError, ValueError):
    pass


class AccuracyError(CouplerError, ArithmeticError):
    """Step doubling changed the integrated state by more than the tolerance."""

    def __init__(self, message, relative_change=None, steps=None):
        super().__init__(message)
        self.relative_change = relative_change
        self.steps = steps


class IncompleteMeasurementError(CouplerError, ValueError):
    pass


class ConfigError(CouplerError, ValueError):
    """Invalid run configuration; ``messages`` holds one entry per bad field."""

    def __init__(self, messages):
        if isinstance(messages, str):
            messages = [messages]
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))
