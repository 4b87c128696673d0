"""Exception types shared across the package."""


class NotATreeError(ValueError):
    """Raised when an operation requires a tree permutation but got something else."""


class CapExceededError(RuntimeError):
    """Raised when an exhaustive sweep would exceed its configured size cap."""


class TooSmallError(ValueError):
    """Raised when an operation is undefined below a minimum length."""


class InvalidConfigError(ValueError):
    """Raised for malformed experiment configurations."""


class EmptyHistogramError(ValueError):
    """Raised when a goodness-of-fit test receives no observations."""


class TooFewSamplesError(ValueError):
    """Raised when a statistical check receives fewer samples than it needs."""
