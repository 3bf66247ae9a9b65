"""Exception types shared across the package.

Plain ``ValueError`` is used for invalid arguments; the classes below mark
the failure modes that callers (in particular the CLI) treat differently.
"""


class ResourceLimitError(RuntimeError):
    """A requested computation exceeds a configured size cap."""


class IllPosedFitError(ValueError):
    """A fit does not have enough distinct abscissas for its degree."""


class ConfigError(ValueError):
    """A configuration file or override failed strict validation."""
