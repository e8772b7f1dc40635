"""Exception types shared across the package."""


class SphereFlockError(Exception):
    """Base class for all library errors."""


class AntipodalPair(SphereFlockError):
    """Two points are numerically antipodal, where the transport operator
    is singular and the model loses well-posedness.

    When raised during time integration, ``time`` holds the failing time
    and ``partial_trajectory`` the frames computed up to that point.
    """

    def __init__(self, message, pair=None, time=None, partial_trajectory=None):
        super().__init__(message)
        self.pair = pair
        self.time = time
        self.partial_trajectory = partial_trajectory


class OffSphere(SphereFlockError):
    """A vector required to lie on the unit sphere does not."""


class NotTangent(SphereFlockError):
    """A vector required to be tangent to the sphere at its base point is not."""


class ZeroVector(SphereFlockError):
    """The zero vector has no radial projection onto the sphere."""


class OutOfRange(SphereFlockError):
    """Argument outside the kernel domain [0, 2]."""


class NoRoot(SphereFlockError):
    """The bracketing interval contains no sign change (degenerate kernel)."""


class NonPositiveValue(SphereFlockError):
    """Log-linear fitting requires strictly positive values."""


class InsufficientSamples(SphereFlockError):
    """Too few samples inside the fit window."""


class InvalidEnsemble(SphereFlockError):
    """Ensemble state violates the sphere or tangency invariants."""


class ConfigError(SphereFlockError):
    """Malformed or inconsistent run configuration."""
