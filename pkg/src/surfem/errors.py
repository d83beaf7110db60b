"""Exception hierarchy shared by all surfem modules."""


class SurfemError(Exception):
    """Base class for every error raised by this package."""


class NoConvergence(SurfemError):
    """The closest-point iteration did not reach its gradient tolerance."""


class AmbiguousProjection(SurfemError):
    """Two distinct local minimisers of the distance are equally close."""


class EmptyRegion(SurfemError):
    """A curvature query was given no sample points."""


class SuffViolated(SurfemError):
    """A triangle violates h_T^2 kappa_T^2 <= c1."""

    def __init__(self, message, worst_triangle=None, worst_value=None):
        super().__init__(message)
        self.worst_triangle = worst_triangle
        self.worst_value = worst_value


class ProjectionFailed(SurfemError):
    """A new vertex could not be projected onto the surface."""


class NonTermination(SurfemError):
    """Conformity closure exceeded its round bound."""


class DegenerateTriangle(SurfemError):
    """A flat triangle has zero (or negative) metric determinant."""


class NormalFlip(SurfemError):
    """nu_h . nu <= 0 somewhere on a triangle: the mesh is too coarse."""


class TubeViolation(SurfemError):
    """The spectral radius of d*H exceeds 1/2, so (I - dH) is not safely invertible."""


class MaxIterExceeded(SurfemError):
    """The iterative solver hit its iteration budget.

    The best iterate is kept on ``report`` so callers can inspect it.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class DisconnectedMesh(SurfemError):
    """Some triangle cannot reach the high-curvature region through mesh edges."""


class BudgetExceeded(SurfemError):
    """The grading loop stopped with violations left."""

    def __init__(self, message, report=None, mesh=None):
        super().__init__(message)
        self.report = report
        self.mesh = mesh


class ConfigError(SurfemError):
    """Malformed experiment configuration."""
