"""Exception types shared across the package."""


class EdgeProbeError(Exception):
    """Base class for all package errors."""


class ParameterError(EdgeProbeError):
    """A precondition on user-supplied parameters is violated."""


class ContractViolation(EdgeProbeError):
    """The round protocol was misused (e.g. answers read before close)."""


class DetectedFailure(EdgeProbeError):
    """A randomized round produced output violating a checkable bound.

    Monte Carlo entry points catch this and return their best hypothesis
    flagged unsuccessful; Las Vegas wrappers restart or fall back.
    """


class InfeasibleError(EdgeProbeError):
    """A construction or verification was refused because the exhaustive
    work it would need exceeds its guard."""
