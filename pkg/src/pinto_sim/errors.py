"""Exception types raised across the package."""


class PintoSimError(Exception):
    """Base class for all simulator errors."""


class DomainError(PintoSimError, ValueError):
    """An argument lies outside the validity range of a model."""


class UnreachableError(PintoSimError, ValueError):
    """The five-bar loop cannot close for the requested joint angles."""


class SingularityError(PintoSimError, ValueError):
    """The leg is too close to a kinematic singularity."""


class OverTwistError(DomainError):
    """Twisted string angle exceeds the geometric limit ``theta * r_s < L_s``."""


class NumericalInstabilityError(PintoSimError, RuntimeError):
    """Energy drift in a lossless run grew beyond the allowed per-step budget."""


class ConfigError(PintoSimError, ValueError):
    """Invalid experiment configuration document."""
