"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Malformed or inconsistent configuration.

    ``key`` names the offending config entry when one can be pinned down.
    """

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class CapacityExceededError(RuntimeError):
    """An enumeration or LP would exceed its hard size cap."""


class SolverError(RuntimeError):
    """The simplex solver could not produce a trustworthy optimum."""


class QueueOverflowError(OverflowError):
    """A queue counter left the signed 64-bit range."""
