"""Exception hierarchy shared by all contextlab modules."""


class ContextLabError(Exception):
    """Base class for every error raised by contextlab."""


class InvalidStateError(ContextLabError, ValueError):
    """A spin, path or joint state is not normalized."""


class InvalidVectorError(ContextLabError, ValueError):
    """A Bloch vector is not of unit length."""


class ZeroBranchError(ContextLabError, ValueError):
    """Conditioning on a path branch that carries no amplitude."""


class CalibrationError(ContextLabError, RuntimeError):
    """No calibration phase reproduces the closed-form subensemble means."""


class ConfigError(ContextLabError, ValueError):
    """Base for sweep-configuration problems."""


class ConfigParseError(ConfigError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class ConfigValidationError(ConfigError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
