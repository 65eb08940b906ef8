"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or inconsistent input data (bad CSV rows, bad config)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class StatisticalError(ValueError):
    """A statistical precondition does not hold (zero variance, too few samples)."""
