"""Exception types raised across the package."""


class InvalidArgument(ValueError):
    """An argument is out of range or inconsistent with the others."""


class InvalidDataset(ValueError):
    """Pairwise counts violate the dataset invariants."""

    def __init__(self, message: str, pair: tuple[int, int] | None = None):
        super().__init__(message)
        self.pair = pair


class CapacityError(RuntimeError):
    """The instance is too large for an exact (enumerative) routine."""


class SamplingFailure(RuntimeError):
    """A rejection sampler exhausted its attempt budget."""


class ConfigurationError(ValueError):
    """An experiment configuration is invalid or self-inconsistent."""
