class TripleLError(Exception):
    """
    Base class for every failure the library reports. The CLI maps each
    subclass onto its process exit code.
    """

    exit_code = 1


class UsageError(TripleLError):
    exit_code = 2


class PreconditionError(TripleLError):
    """
    Input data violates a documented precondition: wrong ramification,
    unbalanced weights, non-squarefree levels, malformed coefficient files.
    """

    exit_code = 3


class PrecisionError(TripleLError):
    """Numerical target (AFE truncation, quadrature agreement) not reached."""

    exit_code = 4


class ConsistencyError(TripleLError):
    """
    An internal cross-check failed: mass mismatch, missing isometry,
    Ramanujan bound violation, unseparated Hecke eigenspaces.
    """

    exit_code = 5
