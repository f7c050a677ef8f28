"""Exception hierarchy shared by the library and the CLI exit codes."""


class ConfigError(ValueError):
    """Invalid configuration or input data (CLI exit code 1)."""


class NumericalError(RuntimeError):
    """A numerical procedure broke down (CLI exit code 2)."""
