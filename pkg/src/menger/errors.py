class MengerError(Exception):
    """Base class for all errors raised by this package."""


class StructuralError(MengerError, ValueError):
    """Arity, base-set or table shape mismatch; malformed input."""


class ContractError(MengerError):
    """An operation was called outside its precondition."""


class IntegrityError(MengerError):
    """A construction produced an object violating a property it must have."""


class ClosureViolation(IntegrityError):
    """An operation result escaped a supposedly closed set of functions."""


class CapExceeded(MengerError):
    """A configured resource cap would be exceeded; the work is refused."""

    def __init__(self, message, partial_size=None):
        super().__init__(message)
        self.partial_size = partial_size
