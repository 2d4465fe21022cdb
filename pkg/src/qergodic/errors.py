"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class SpectrumError(DomainError):
    """A spectrum violates a degeneracy or resonance precondition."""


class GenerationError(RuntimeError):
    """Rejection sampling ran out of attempts."""


class ConfigError(DomainError):
    """A configuration field is missing or invalid.

    ``field`` names the offending entry so command-line diagnostics can
    point at it.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
