"""Exception types shared across the package."""

__all__ = ["ParameterError", "LevelError"]


class ParameterError(ValueError):
    """An argument is outside the admissible domain of an operation."""


class LevelError(ParameterError):
    """A requested error-rate level is not attainable.

    Carries the attainable supremum so callers that want to clamp can do so
    deliberately instead of guessing.
    """

    def __init__(self, message: str, supremum: float | None = None):
        super().__init__(message)
        self.supremum = supremum
