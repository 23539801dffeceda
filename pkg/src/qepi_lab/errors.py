"""Exception hierarchy shared by all qepi_lab modules."""


class QepiLabError(Exception):
    """Base class for every error raised by qepi_lab."""


class NotPositiveDefinite(QepiLabError, ValueError):
    pass


class DomainError(QepiLabError, ValueError):
    pass


class InadmissibleCovariance(QepiLabError, ValueError):
    """Covariance matrix violates sigma + i*Delta >= 0."""


class PureModeError(QepiLabError, ValueError):
    """A normal mode is (numerically) pure, so the Fisher information diverges."""


class ShapeMismatch(QepiLabError, ValueError):
    pass


class SingularBlock(QepiLabError, ValueError):
    pass


class SolverOverflow(QepiLabError, RuntimeError):
    """Flow integration exceeded the local-time cap.

    The samples collected before the overflow are kept in ``partial``.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class InsufficientRange(QepiLabError, ValueError):
    pass


class TruncationError(QepiLabError, RuntimeError):
    """Probability mass lost to Fock-space truncation exceeds the budget."""


class SupportViolation(QepiLabError, ValueError):
    pass


class InadmissibleProbe(QepiLabError, ValueError):
    pass
