"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class SingularityError(DomainError):
    """The requested quantity diverges (user on the antenna ring, zero distance)."""


class SingularChannelError(ArithmeticError):
    """Numerically singular Gram matrix, or too many consecutive rejected draws."""


class ConfigError(ValueError):
    """Invalid scenario configuration. ``field`` names the offending key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
