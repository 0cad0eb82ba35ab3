"""Exception types raised across the package."""


class CarpetError(Exception):
    """Base class for every error raised by carpetdim."""


class MalformedCarpet(CarpetError, ValueError):
    pass


class DomainError(CarpetError, ValueError):
    """An argument lies outside the domain of a frontier function."""


class ConvergenceFailure(CarpetError, RuntimeError):
    """Multistart optimization produced disagreeing values."""


class CertificationFailure(CarpetError, RuntimeError):
    pass


class ResourceLimit(CarpetError, RuntimeError):
    """Projected enumeration cost exceeds the configured cap."""


class WordTooShort(CarpetError, ValueError):
    pass


class ScheduleTooShort(CarpetError, ValueError):
    pass


class TargetTooShort(CarpetError, ValueError):
    pass


class LengthMismatch(CarpetError, ValueError):
    pass
