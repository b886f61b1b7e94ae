"""Exception types shared across the package."""


class TranslabError(Exception):
    """Base class for all errors raised by translab."""


class ParameterError(TranslabError, ValueError):
    """An argument violates a documented precondition."""


class HorizonMismatch(ParameterError):
    """A window set and a family generator disagree on the horizon."""


class UnsupportedOperation(TranslabError, TypeError):
    """The operation is not defined for this operator kind."""


class DichotomyInconclusive(TranslabError):
    """Norm growth of the powers was neither clearly bounded nor clearly large."""

    def __init__(self, message: str, profile: list[float]):
        super().__init__(message)
        self.profile = profile


class WitnessNotFound(TranslabError):
    """A constructive search (asymptotic cell, RP pair, ...) came back empty."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConfigError(TranslabError):
    """An experiment configuration could not be parsed or resolved."""
