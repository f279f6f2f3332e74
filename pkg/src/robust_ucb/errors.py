"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class PreconditionError(InvalidInputError):
    """A documented precondition (validity regime of a bound or estimator) fails."""


class ConfigError(InvalidInputError):
    """An experiment config or CLI request is malformed or inconsistent."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)
