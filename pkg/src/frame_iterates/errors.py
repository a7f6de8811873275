"""Exception hierarchy shared by every module."""


class FrameIteratesError(Exception):
    """Base class for library errors."""


class InvalidMatrix(FrameIteratesError, ValueError):
    """Matrix has non-finite entries or is empty."""


class NotHermitian(FrameIteratesError, ValueError):
    pass


class ShapeError(FrameIteratesError, ValueError):
    pass


class DegenerateFamily(FrameIteratesError, ValueError):
    """All vectors of a family vanish."""


class SpecError(FrameIteratesError, ValueError):
    """Invalid generator kind or parameters."""


class LinearlyDependent(FrameIteratesError):
    pass


class NotRepresentable(LinearlyDependent):
    """A dependency of the family is not compatible with the index shift.

    The partially built representation is attached as ``rep`` for reporting.
    """

    def __init__(self, message, rep=None):
        super().__init__(message)
        self.rep = rep


class IllConditioned(FrameIteratesError):
    pass


class NotApplicable(FrameIteratesError):
    """A check's preconditions do not hold (not a failure of the theory)."""


class InvalidPartition(FrameIteratesError, ValueError):
    pass


class ContractViolation(FrameIteratesError):
    """A numerical check of a theorem failed.

    ``details`` carries the measured values.
    """

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details or {}
