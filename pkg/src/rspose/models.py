"""Camera model hierarchy, monomial liftings and motion parameters."""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class CameraModel(str, Enum):
    PERSPECTIVE = "perspective"
    LINEAR_PB = "linear_pb"
    LINEAR_RS = "linear_rs"
    UNIFORM_PB = "uniform_pb"
    UNIFORM_RS = "uniform_rs"


# Monomial exponents (a, b) meaning u^a * v^b; the ordering is part of the
# matrix layout contract and must not change.
MONOMIALS = {
    CameraModel.PERSPECTIVE: [(1, 0), (0, 1), (0, 0)],
    CameraModel.LINEAR_PB: [(1, 1), (1, 0), (0, 1), (0, 0)],
    CameraModel.LINEAR_RS: [(2, 0), (1, 1), (1, 0), (0, 1), (0, 0)],
    CameraModel.UNIFORM_PB: [(2, 1), (2, 0), (1, 1), (1, 0), (0, 1), (0, 0)],
    CameraModel.UNIFORM_RS: [(3, 0), (2, 1), (2, 0), (1, 1), (1, 0), (0, 1), (0, 0)],
}

LIFT_DIM = {m: len(exps) for m, exps in MONOMIALS.items()}

# Points needed by the linear solver / by a minimal (DOF-counting) solver.
LINEAR_POINTS = {
    CameraModel.PERSPECTIVE: 8,
    CameraModel.LINEAR_PB: 11,
    CameraModel.LINEAR_RS: 20,
    CameraModel.UNIFORM_PB: 31,
    CameraModel.UNIFORM_RS: 44,
}
MINIMAL_POINTS = {
    CameraModel.PERSPECTIVE: 5,
    CameraModel.LINEAR_PB: 11,
    CameraModel.LINEAR_RS: 11,
    CameraModel.UNIFORM_PB: 17,
    CameraModel.UNIFORM_RS: 17,
}


def uses_w(model):
    """Whether the model carries angular (per-row) velocities."""
    return model in (CameraModel.UNIFORM_PB, CameraModel.UNIFORM_RS)


def uses_d(model):
    """Whether the model carries linear (per-row) velocities."""
    return model is not CameraModel.PERSPECTIVE


def is_pushbroom(model):
    return model in (CameraModel.LINEAR_PB, CameraModel.UNIFORM_PB)


def lift(points, model):
    """Monomial lifting of image points.

    points : (..., 2) array of (u, v) in normalized coordinates
    returns : (..., m) array in the model's monomial ordering, last entry 1
    """
    pts = np.asarray(points, dtype=float)
    u, v = pts[..., 0], pts[..., 1]
    cols = [u ** a * v ** b for a, b in MONOMIALS[model]]
    return np.stack(cols, axis=-1)


def lift_v_split(model):
    """Index masks of monomials linear in v vs. independent of v.

    Every lifting in the hierarchy is at most degree 1 in v, so the epipolar
    residual is linear in v' for fixed (u, v, u'): this split is what curve
    sampling and variety sampling rely on.
    """
    exps = MONOMIALS[model]
    with_v = np.array([b == 1 for _, b in exps])
    return with_v, ~with_v


def _check_zero(name, vec):
    if np.any(np.asarray(vec) != 0.0):
        raise ValueError(f"{name} must be exactly zero for this camera model")


@dataclass(frozen=True)
class MotionParams:
    """Relative pose plus per-camera intra-frame velocities.

    Velocities are per *normalized* row unit of the scanline coordinate u.
    ``t`` is defined up to global scale; solvers gauge-fix ||t|| = 1.
    """

    model: CameraModel
    R: np.ndarray
    t: np.ndarray
    w1: np.ndarray = field(default_factory=lambda: np.zeros(3))
    w2: np.ndarray = field(default_factory=lambda: np.zeros(3))
    d1: np.ndarray = field(default_factory=lambda: np.zeros(3))
    d2: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "R", np.asarray(self.R, dtype=float))
        for name in ("t", "w1", "w2", "d1", "d2"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(3))
        if not uses_w(self.model):
            _check_zero("w1", self.w1)
            _check_zero("w2", self.w2)
        if not uses_d(self.model):
            _check_zero("d1", self.d1)
            _check_zero("d2", self.d2)

    def gauge_fixed(self):
        """Rescale so that ||t|| = 1, keeping velocities relative to t."""
        n = float(np.linalg.norm(self.t))
        if n == 0.0:
            return self
        return MotionParams(self.model, self.R, self.t / n,
                            self.w1, self.w2, self.d1 / n, self.d2 / n)

    def with_model(self, model):
        """Reinterpret under another model (velocities must be compatible)."""
        return MotionParams(model, self.R, self.t, self.w1, self.w2, self.d1, self.d2)
