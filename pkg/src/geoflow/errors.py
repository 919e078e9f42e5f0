"""Exception types shared across the solver."""


class GeoflowError(Exception):
    """Base class for solver-specific failures."""


class UnsupportedOperationError(GeoflowError):
    """Operation not available for the given metric/target combination."""


class OffManifoldError(GeoflowError):
    """A point claimed to lie on the target fails its defining equations."""


class OutsideTubeError(GeoflowError):
    """A point left the tubular neighborhood where the projection is defined."""


class NoContractionError(GeoflowError):
    """Fixed-point iteration failed to contract; retry with a smaller horizon."""


class NumericalAbortError(GeoflowError):
    """Time integration aborted after retries; carries the partial trajectory."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory
