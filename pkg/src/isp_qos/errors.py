class DomainError(ValueError):
    """An argument lies outside the domain of a model function."""


class ConfigError(ValueError):
    """A scenario or CLI configuration is malformed or inconsistent."""
