"""Exception types shared across the package."""


class DatasetError(ValueError):
    """Malformed or unreadable input data."""


class DegenerateInputError(ValueError):
    """Input on which clustering cannot proceed (e.g. every ball is noise)."""


class KUnreachableError(DegenerateInputError):
    """Requested K cannot be produced by the merge schedule."""
