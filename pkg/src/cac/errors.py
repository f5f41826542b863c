"""Exception types shared across the package."""
from __future__ import annotations


class ConfigError(ValueError):
    """Invalid configuration value or malformed config file."""


class DataError(ValueError):
    """Dataset could not be read or fails validation."""


class KernelSizeError(MemoryError):
    """Requested kernel matrix exceeds the configured memory cap."""


class MultiIndexCapError(ValueError):
    """Direct projection sum refused: multi-index count exceeds the cap."""


class BudgetExhausted(RuntimeError):
    """Label budget hit (query cap or replay file ran out).

    Carries the partially-filled state so callers can still emit a report.
    """

    def __init__(self, message: str, state=None):
        super().__init__(message)
        self.state = state


class ProtocolError(RuntimeError):
    """Label-server protocol violation (bad point id, busy port, ...)."""
