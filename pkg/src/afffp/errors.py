"""Exception types shared across the package."""


class InputError(ValueError):
    """Out-of-range index, dimension mismatch or otherwise malformed input."""


class NumericalDegeneracyError(ArithmeticError):
    """A quantity needed for an update is zero or non-finite."""


class InstanceTooLargeError(ValueError):
    """The instance exceeds the size an enumeration routine accepts."""


class RunFailure(RuntimeError):
    """An episode failed; carries the step and replication where it happened."""

    def __init__(self, message, step=None, replication=None):
        super().__init__(message)
        self.step = step
        self.replication = replication

    def __str__(self):
        where = []
        if self.replication is not None:
            where.append(f"replication {self.replication}")
        if self.step is not None:
            where.append(f"step {self.step}")
        base = super().__str__()
        return f"{base} ({', '.join(where)})" if where else base


class OutputError(OSError):
    """The output location cannot be written."""
