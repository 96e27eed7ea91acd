"""Exception types shared across the package."""


class GridtoneError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(GridtoneError):
    """Input document or value violates a schema or invariant."""


class DomainError(GridtoneError):
    """Argument outside the operation's valid domain."""


class CapacityError(GridtoneError):
    """Codeword space exhausted before every class could be assigned."""

    def __init__(self, class_name: str, assigned: int):
        self.class_name = class_name
        self.assigned = assigned
        super().__init__(
            f"no codeword available for class {class_name!r} "
            f"(assigned {assigned} before exhaustion)"
        )


class FormatError(GridtoneError):
    """Audio file is not in the supported on-disk format."""


class DecodeError(GridtoneError):
    """Spectral decoding could not recover a valid codeword."""
