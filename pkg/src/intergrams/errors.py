class ConfigError(ValueError):
    """Invalid parameters or inputs, detected before any counting starts."""


class CorpusIOError(OSError):
    """A corpus file could not be read; ``path`` names the offender."""

    def __init__(self, path, cause):
        super().__init__(f"cannot read {path}: {cause}")
        self.path = path


class UnsupportedParameter(ConfigError):
    """A closed-form bound was asked for outside the range it is derived for."""
