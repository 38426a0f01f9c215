"""Exception hierarchy shared by every module of the package."""


class TensorPCAError(Exception):
    """Base class for all library errors."""


class DimensionError(TensorPCAError, ValueError):
    """Shapes or extents that should agree do not."""


class TensorIndexError(TensorPCAError, IndexError):
    """A multi-index or linear index lies outside its shape."""


class ArgumentError(TensorPCAError, ValueError):
    """An argument is outside the domain of the operation."""


class ContractViolation(TensorPCAError, ValueError):
    """An input fails a structural precondition (e.g. self-adjointness)."""


class ConvergenceError(TensorPCAError, ArithmeticError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class CapacityError(TensorPCAError, MemoryError):
    """An operation would allocate more than the configured cap."""

    def __init__(self, message, required_bytes=None):
        super().__init__(message)
        self.required_bytes = required_bytes


class FormatError(TensorPCAError, ValueError):
    """A persisted file is malformed."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class IngestionError(TensorPCAError, OSError):
    """An input image could not be decoded."""
