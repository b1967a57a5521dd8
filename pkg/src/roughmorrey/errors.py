"""Exception hierarchy shared by every module."""


class RoughMorreyError(Exception):
    """Base class for all package errors."""


class ConfigurationError(RoughMorreyError, ValueError):
    """Invalid grid, family, model or experiment parameters."""


class DomainError(RoughMorreyError, ValueError):
    """An argument lies outside the domain of a mathematical operation."""


class PreconditionError(RoughMorreyError, ValueError):
    """A stated precondition of an operation does not hold for the inputs."""


class GateError(ConfigurationError):
    """Exponent or weight-class hypothesis of an inequality is violated.

    ``hypothesis`` names the violated hypothesis so that front ends can
    report it verbatim.
    """

    def __init__(self, message, hypothesis=""):
        super().__init__(message)
        self.hypothesis = hypothesis


class KernelError(RoughMorreyError, ValueError):
    """Kernel rejected by an operator (e.g. missing cancellation)."""

    def __init__(self, message, defect=None):
        super().__init__(message)
        self.defect = defect
