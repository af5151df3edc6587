class NumericDivergence(ArithmeticError):
    """Raised when a simulation produces non-finite values."""


class NoRuleFired(ValueError):
    """Raised by type reduction when every upper firing strength is zero."""


class ConfigError(ValueError):
    """Invalid run configuration. ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
