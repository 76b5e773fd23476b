"""Error types shared across the toolkit.

ValidationError maps to CLI exit code 1; anything else that escapes maps to 2.
"""


class ValidationError(ValueError):
    """Input violates a documented contract (bad config, bad data, bad shape)."""


class ParseError(ValidationError):
    """A structured input file could not be parsed."""

    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{self.path}:{line}: {message}")


class ConstantInputError(ValidationError):
    """A statistic is undefined because the input has zero variance."""
