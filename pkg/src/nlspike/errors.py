"""Exception types shared across the package."""


class NlspikeError(Exception):
    """Base class for all package errors."""


class ParameterError(NlspikeError, ValueError):
    """Invalid argument or distribution/model parameter."""


class CapabilityError(NlspikeError):
    """Requested operation is not supported for this input combination."""


class ContractError(NlspikeError):
    """An input violates a documented structural contract (e.g. symmetry)."""


class ConvergenceError(NlspikeError):
    """An iterative solver failed to converge; carries the last residual."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class ConfigError(NlspikeError):
    """Malformed or inconsistent experiment configuration."""


class FormatError(NlspikeError):
    """A data file does not have the expected layout."""
