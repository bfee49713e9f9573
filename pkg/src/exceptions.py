"""Custom exceptions for the adaptive-submodular cover toolkit."""


class AscError(Exception):
    """Base exception for all adaptive-submodular cover errors."""
    pass


class InstanceValidationError(AscError):
    """Exception raised when an instance, or its file form, is invalid."""

    def __init__(self, message: str, field: str = None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class GroundSetTooLargeError(AscError):
    """Exception raised when exact enumeration would exceed the ground-set guard."""
    pass


class ConditioningOnNullError(AscError):
    """Exception raised when conditioning on a zero-probability partial realization."""
    pass


class ItemAlreadyObservedError(AscError):
    """Exception raised when an item already in dom(psi) is observed again."""
    pass


class UndefinedEntryError(AscError):
    """Exception raised when a table utility has no value for a partial realization."""
    pass


class NoItemsLeftError(AscError):
    """Exception raised when greedy has no unselected item but is not covered."""
    pass


class NotCoverableError(AscError):
    """Exception raised when some realization can never reach the maximal value."""
    pass


class TooManyItemsError(AscError):
    """Exception raised when the brute-force oracle is asked for too many items."""
    pass


class GuardExceededError(AscError):
    """Exception raised when a search parameter exceeds its desk-scale guard."""
    pass
