import numpy as np
import pytest

from rspose.models import (CameraModel, LIFT_DIM, LINEAR_POINTS, MINIMAL_POINTS,
                           MONOMIALS, MotionParams, lift, lift_v_split)


def test_lift_dims():
    dims = {CameraModel.PERSPECTIVE: 3, CameraModel.LINEAR_PB: 4,
            CameraModel.LINEAR_RS: 5, CameraModel.UNIFORM_PB: 6,
            CameraModel.UNIFORM_RS: 7}
    for m, d in dims.items():
        assert LIFT_DIM[m] == d
        assert lift(np.zeros(2), m).shape == (d,)


def test_lift_values():
    u, v = 0.3, -0.2
    l = lift(np.array([u, v]), CameraModel.LINEAR_RS)
    assert np.allclose(l, [u * u, u * v, u, v, 1.0])
    l = lift(np.array([u, v]), CameraModel.UNIFORM_RS)
    assert np.allclose(l, [u ** 3, u * u * v, u * u, u * v, u, v, 1.0])


def test_lift_batch_shape():
    pts = np.random.default_rng(0).normal(size=(7, 4, 2))
    out = lift(pts, CameraModel.UNIFORM_PB)
    assert out.shape == (7, 4, 6)
    assert np.allclose(out[..., -1], 1.0)


def test_point_counts():
    assert LINEAR_POINTS[CameraModel.PERSPECTIVE] == 8
    assert LINEAR_POINTS[CameraModel.LINEAR_PB] == 11
    assert LINEAR_POINTS[CameraModel.LINEAR_RS] == 20
    assert LINEAR_POINTS[CameraModel.UNIFORM_PB] == 31
    assert LINEAR_POINTS[CameraModel.UNIFORM_RS] == 44
    assert MINIMAL_POINTS[CameraModel.LINEAR_RS] == 11
    assert MINIMAL_POINTS[CameraModel.UNIFORM_RS] == 17


def test_v_split_degree_one():
    for m, exps in MONOMIALS.items():
        assert all(b <= 1 for _, b in exps)
        with_v, without = lift_v_split(m)
        assert with_v.sum() + without.sum() == LIFT_DIM[m]


def test_motion_params_zero_velocity_validation():
    R, t = np.eye(3), np.array([1.0, 0, 0])
    with pytest.raises(ValueError):
        MotionParams(CameraModel.PERSPECTIVE, R, t, d1=np.ones(3))
    with pytest.raises(ValueError):
        MotionParams(CameraModel.LINEAR_RS, R, t, w1=np.ones(3))
    MotionParams(CameraModel.UNIFORM_RS, R, t, w1=np.ones(3), d1=np.ones(3))


def test_gauge_fixed_scales_velocities():
    p = MotionParams(CameraModel.LINEAR_RS, np.eye(3), np.array([0.0, 0, 2.0]),
                     d1=np.array([0.2, 0, 0]), d2=np.array([0, 0.4, 0]))
    g = p.gauge_fixed()
    assert np.isclose(np.linalg.norm(g.t), 1.0)
    assert np.allclose(g.d1, [0.1, 0, 0])
    assert np.allclose(g.d2, [0, 0.2, 0])
