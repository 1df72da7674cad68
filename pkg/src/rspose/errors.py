"""Exception types shared across the solver stack."""


class RsposeError(Exception):
    """Base class for all solver errors."""


class InsufficientPoints(RsposeError):
    """Fewer correspondences than the chosen algorithm requires."""


class DegenerateConfiguration(RsposeError):
    """Constraint system is rank deficient (pure rotation, coplanar points, ...)."""


class NoRealSolution(RsposeError):
    """The quadratic completion system has no real roots."""


class NearZeroVelocity(RsposeError):
    """Read-off atom blocks are numerically zero; fall back to a simpler model."""


class CheiralityAmbiguous(RsposeError):
    """No pose candidate places a majority of the points in front of both cameras."""


class NoConsensus(RsposeError):
    """RANSAC failed to find a consensus set above the minimal acceptance size."""


class ConvergenceFailed(RsposeError):
    """Nonlinear minimization did not reach the configured objective threshold."""


class NonFiniteObjective(RsposeError):
    """Objective became NaN/inf during the search."""


class FrustumExhausted(RsposeError):
    """Synthetic generator ran out of resampling budget."""


class ZeroVector(RsposeError):
    """A direction metric was asked for a zero-length vector."""
