from typing import Iterable, Tuple


class HelferError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(HelferError, ValueError):
    """An input lies outside the domain of the requested operation."""


class ApproximationRegimeError(ParameterError):
    """q <= 1: the high-frequency lower cutoff q*p0 no longer sits above p0."""


class EmptyIntegrationRangeError(ParameterError):
    """lambda <= q*p0: the omega-integration range [q*p0, lambda] is empty."""


class GridError(ParameterError):
    pass


class ShellError(ParameterError):
    pass


class LightConeError(ParameterError):
    """Raised when evaluation points fall inside the light-cone band."""

    def __init__(self, message: str, indices: Iterable[Tuple[int, ...]] = ()):
        self.indices = tuple(tuple(i) for i in indices)
        if self.indices:
            message = f"{message}; offending indices: {list(self.indices)}"
        super().__init__(message)
