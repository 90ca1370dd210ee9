"""Exception hierarchy shared by the library and the CLI."""


class PadimError(Exception):
    """Base class for all package errors."""


class ConfigError(PadimError, ValueError):
    """Invalid or inconsistent configuration."""


class ConfigParseError(ConfigError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class InvalidRadiusError(ConfigError):
    pass


class NumericalError(PadimError, ArithmeticError):
    """A numerical routine failed or was called outside its domain."""


class ZFViolationError(NumericalError):
    """Zero forcing needs strictly more antennas than users."""


class OverheadOverflowError(NumericalError):
    """Pilot overhead consumes the whole coherence block."""


class HeadroomExceededError(NumericalError):
    """Mean per-antenna output exceeds the amplifier's allowed average power."""


class InfeasibleError(NumericalError):
    pass


class ScanTooShortError(NumericalError):
    pass


class NoConvergenceError(NumericalError):
    pass
