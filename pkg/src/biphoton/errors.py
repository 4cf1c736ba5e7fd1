"""Exception and warning types shared by all modules."""


class BiphotonError(Exception):
    """Base class for all library errors."""


class DomainError(BiphotonError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ContractError(BiphotonError, ValueError):
    """A documented precondition of an operation is violated."""


class NumericError(BiphotonError, ArithmeticError):
    """A numerical procedure failed to reach its declared tolerance.

    Parameters
    ----------
    message : str
        Human readable description.
    achieved : float, optional
        The error estimate that was actually achieved, if known.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ConfigError(BiphotonError, ValueError):
    """A run configuration is malformed."""


class ValidityWarning(UserWarning):
    """The requested state lies outside the validated parameter regime."""
