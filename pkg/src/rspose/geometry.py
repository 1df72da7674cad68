"""Rotation algebra, per-scanline poses and pairwise scanline essential matrices."""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .models import CameraModel, MotionParams, uses_w


def skew(v):
    """Cross-product matrix [v]_x."""
    x, y, z = np.asarray(v, dtype=float).reshape(3)
    return np.array([[0.0, -z, y],
                     [z, 0.0, -x],
                     [-y, x, 0.0]])


def unskew(M):
    """Inverse of skew() for the antisymmetric part of M."""
    A = 0.5 * (M - M.T)
    return np.array([A[2, 1], A[0, 2], A[1, 0]])


def rotation_exact(w, u=1.0):
    """Rodrigues rotation by angle u*||w|| about axis w/||w||."""
    w = np.asarray(w, dtype=float).reshape(3)
    omega = np.linalg.norm(w)
    if omega == 0.0:
        return np.eye(3)
    n = w / omega
    K = skew(n)
    a = u * omega
    return np.eye(3) + np.sin(a) * K + (1.0 - np.cos(a)) * (K @ K)


def rotation_small(w, u=1.0):
    """First-order rotation I + u[w]_x (not orthonormal in general)."""
    return np.eye(3) + u * skew(np.asarray(w, dtype=float).reshape(3))


def rotation_log(R):
    """Angle-axis vector of a rotation matrix."""
    R = np.asarray(R, dtype=float)
    c = np.clip((np.trace(R) - 1.0) / 2.0, -1.0, 1.0)
    theta = np.arccos(c)
    if theta < 1e-12:
        return unskew(R)
    if np.pi - theta < 1e-6:
        # near pi: axis from the symmetric part
        A = (R + np.eye(3)) / 2.0
        axis = np.sqrt(np.clip(np.diag(A), 0.0, None))
        # fix signs using the largest component
        k = int(np.argmax(axis))
        s = np.sign(A[k, :])
        s[s == 0] = 1.0
        axis = axis * s * np.sign(axis[k]) if axis[k] > 0 else axis
        axis = axis / np.linalg.norm(axis)
        return theta * axis
    return theta / (2.0 * np.sin(theta)) * np.array(
        [R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])


@dataclass(frozen=True)
class ScanlinePose:
    """Local camera pose of one scanline: x_cam = R_u X + t_u."""
    R_u: np.ndarray
    t_u: np.ndarray
    u: float


def scanline_pose(params: MotionParams, frame: int, u: float, mode: str = "exact") -> ScanlinePose:
    """Pose of scanline u of frame 1 or 2.

    Frame 1 reference pose is [I, 0]; frame 2 reference pose is [R, t].
    Linear models keep R_u constant; uniform models rotate per Eq-style
    exact Rodrigues ("exact") or first-order ("small") per-row model.
    """
    if frame == 1:
        R0, t0 = np.eye(3), np.zeros(3)
        w, d = params.w1, params.d1
    elif frame == 2:
        R0, t0 = params.R, params.t
        w, d = params.w2, params.d2
    else:
        raise ValueError("frame must be 1 or 2")
    if not uses_w(params.model) and np.any(w != 0.0):
        raise ValueError("linear models have zero angular velocity")
    if mode == "exact":
        Ru = rotation_exact(w, u) @ R0
    elif mode == "small":
        Ru = rotation_small(w, u) @ R0
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return ScanlinePose(Ru, t0 + u * d, float(u))


class PairwiseEssential(NamedTuple):
    E: np.ndarray
    degenerate: bool


def pairwise_essential(pose_i: ScanlinePose, pose_j: ScanlinePose) -> PairwiseEssential:
    """3x3 essential matrix between two scanline poses (pose_i observes x, pose_j x').

    A zero-baseline pair yields the zero matrix, flagged degenerate.
    """
    Rrel = pose_j.R_u @ pose_i.R_u.T
    trel = pose_j.t_u - Rrel @ pose_i.t_u
    E = skew(trel) @ Rrel
    scale = max(np.linalg.norm(pose_i.t_u), np.linalg.norm(pose_j.t_u), 1.0)
    return PairwiseEssential(E, bool(np.linalg.norm(trel) < 1e-12 * scale))
