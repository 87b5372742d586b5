"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: ValidationError -> 2, IOFailure -> 3,
CapacityError -> 4.
"""


class MctdError(Exception):
    """Base class for package errors."""


class ValidationError(MctdError, ValueError):
    """Invalid input or configuration."""


class CapacityError(MctdError, ValueError):
    """A size guard was exceeded (level overflow, enumeration too large)."""


class IOFailure(MctdError, OSError):
    """File input/output failed; message carries the file context."""
