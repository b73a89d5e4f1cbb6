"""Shared exception types."""


class CapacityError(RuntimeError):
    """Requested size exceeds what the exact method can handle."""


class PreconditionError(RuntimeError):
    """A theorem hypothesis required by the operation does not hold.

    Callers running exploratory sweeps may bypass these checks with an
    explicit override flag; the default enforces the hypotheses.
    """
