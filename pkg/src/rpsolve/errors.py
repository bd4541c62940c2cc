"""Exception types shared across the package."""


class SingularityError(ValueError):
    """A pair energy sits on a pole of the equations (level hit or pair collision)."""


class NonconvergenceError(RuntimeError):
    """Continuation or Newton iteration failed to reach the requested tolerance."""

    def __init__(self, message: str, last_good_g: float | None = None):
        super().__init__(message)
        self.last_good_g = last_good_g


class CollisionError(NonconvergenceError):
    """A pair-energy collision survived conjugate-pair promotion."""


class ContourError(ValueError):
    """A pair energy lies on the integration contour and no principal value was requested."""


class CapacityError(ValueError):
    """Requested diagonalization exceeds the configured size caps."""


class ConfigError(ValueError):
    """Run configuration failed validation before any computation."""
