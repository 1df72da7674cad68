"""Generalized essential matrices of the RS/PB camera hierarchy.

The 5x5 linear rolling-shutter matrix is assembled from its atomic 3x3
essential matrices.  The 4x4/6x6/7x7 matrices are obtained by exact
polynomial interpolation of the scanline epipolar form on a tensor grid and
truncation to the model's monomial support, which avoids hand-transcribing
entry formulas.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import skew
from .models import CameraModel, MONOMIALS, MotionParams, is_pushbroom, lift


@dataclass(frozen=True)
class GeneralizedEssential:
    """Model-tagged square matrix F with lift(x')^T F lift(x) = 0."""
    model: CameraModel
    F: np.ndarray

    @property
    def dim(self):
        return self.F.shape[0]


def canonicalize(F):
    """Scale to ||F||_F = 1 with the first significant entry positive."""
    F = np.asarray(F, dtype=float)
    n = np.linalg.norm(F)
    if n == 0.0:
        return F.copy()
    F = F / n
    flat = F.ravel()
    sig = np.flatnonzero(np.abs(flat) > 1e-9 * np.abs(flat).max())
    if sig.size and flat[sig[0]] < 0:
        F = -F
    return F


def residual(ge: GeneralizedEssential, x1, x2):
    """Bilinear epipolar residual lift(x2)^T F lift(x1), vectorized."""
    l1 = lift(x1, ge.model)
    l2 = lift(x2, ge.model)
    return np.einsum("...i,ij,...j->...", l2, ge.F, l1)


# ---------------------------------------------------------------------------
# scanline epipolar form (small-rotation relative model, Eqs. of section 4)

def _relative_grid(params, up, u, pb):
    """E[a, b] between scanline u[b] of frame 1 and up[a] of frame 2.

    Uses the first-order relative rotation
    (I + u'[w2]x) R (I - u[w1]x), which is what every matrix in the
    hierarchy linearizes.
    """
    R, t = params.R, params.t
    W1, W2 = skew(params.w1), skew(params.w2)
    I = np.eye(3)
    A2 = I[None] + up[:, None, None] * W2[None]          # (nL,3,3)
    A1 = I[None] - u[:, None, None] * W1[None]           # (nR,3,3)
    Rrel = np.einsum("aij,jk,bkl->abil", A2, R, A1)      # (nL,nR,3,3)
    d1r = Rrel @ params.d1
    tau = t[None, None] + up[:, None, None] * params.d2[None, None] \
        - u[None, :, None] * d1r
    cols = np.cross(tau[:, :, None, :], np.swapaxes(Rrel, 2, 3))
    return np.swapaxes(cols, 2, 3)


def scanline_residual_grid(params, left_pts, right_pts):
    """Epipolar residual for every (left, right) grid point pair.

    left_pts are (u', v') in image 2, right_pts (u, v) in image 1.
    Push-broom models use view-plane rays [0, v, 1].
    """
    pb = is_pushbroom(params.model)
    up, vp = left_pts[:, 0], left_pts[:, 1]
    u, v = right_pts[:, 0], right_pts[:, 1]
    E = _relative_grid(params, up, u, pb)
    if pb:
        xl = np.stack([np.zeros_like(up), vp, np.ones_like(up)], axis=-1)
        xr = np.stack([np.zeros_like(u), v, np.ones_like(u)], axis=-1)
    else:
        xl = np.stack([up, vp, np.ones_like(up)], axis=-1)
        xr = np.stack([u, v, np.ones_like(u)], axis=-1)
    return np.einsum("ai,abij,bj->ab", xl, E, xr)


# maximum u-degree of the full scanline expansion, per model
_FULL_DEG = {
    CameraModel.LINEAR_PB: 1,
    CameraModel.LINEAR_RS: 2,
    CameraModel.UNIFORM_PB: 3,
    CameraModel.UNIFORM_RS: 4,
}

_EXTRACTORS = {}


def _extractor(model):
    """Grid points, inverse Vandermonde and lift-index map for one model."""
    if model in _EXTRACTORS:
        return _EXTRACTORS[model]
    deg = _FULL_DEG[model]
    basis = [(a, b) for a in range(deg + 1) for b in (0, 1)]
    # Chebyshev u-nodes x {-1, 1} in v: well conditioned and exact
    k = np.arange(deg + 1)
    u_nodes = np.cos((2 * k + 1) * np.pi / (2 * (deg + 1)))
    pts = np.array([(un, vn) for un in u_nodes for vn in (-1.0, 1.0)])
    M = np.array([[p[0] ** a * p[1] ** b for a, b in basis] for p in pts])
    Minv = np.linalg.inv(M)
    idx = [basis.index(e) for e in MONOMIALS[model]]
    _EXTRACTORS[model] = (pts, Minv, np.array(idx))
    return _EXTRACTORS[model]


def _build_by_extraction(params):
    pts, Minv, idx = _extractor(params.model)
    res = scanline_residual_grid(params, pts, pts)
    C = Minv @ res @ Minv.T
    F = C[np.ix_(idx, idx)]
    F[:2, :2] = 0.0
    return F


# ---------------------------------------------------------------------------
# linear rolling shutter: explicit atom assembly

def atoms_from_params(params):
    """Atomic essential matrices (E0, E1, E2) of the linear RS model.

    E1 carries the d1 <- R d1 redefinition that moves d1 into frame 2.
    """
    E0 = skew(params.t) @ params.R
    E1 = skew(params.R @ params.d1) @ params.R
    E2 = skew(params.d2) @ params.R
    return E0, E1, E2


def linear_rs_from_atoms(E0, E1, E2):
    """Assemble the 5x5 matrix from its atoms.

    Index map derived by expanding
    [u',v',1] (E0 + u' E2 - u E1) [u,v,1]^T over the monomial products of
    (u^2, uv, u, v, 1); validated against the interpolation builder.
    """
    F = np.zeros((5, 5))
    F[0, 2:5] = E2[0]
    F[1, 2:5] = E2[1]
    F[2:5, 0] = -E1[:, 0]
    F[2:5, 1] = -E1[:, 1]
    F[2, 2] = E0[0, 0] + E2[2, 0] - E1[0, 2]
    F[2, 3] = E0[0, 1] + E2[2, 1]
    F[2, 4] = E0[0, 2] + E2[2, 2]
    F[3, 2] = E0[1, 0] - E1[1, 2]
    F[3, 3] = E0[1, 1]
    F[3, 4] = E0[1, 2]
    F[4, 2] = E0[2, 0] - E1[2, 2]
    F[4, 3] = E0[2, 1]
    F[4, 4] = E0[2, 2]
    return F


def build(params: MotionParams, scale: bool = True) -> GeneralizedEssential:
    """Construct the generalized essential matrix of params.model."""
    if params.model is CameraModel.PERSPECTIVE:
        F = skew(params.t) @ params.R
    elif params.model is CameraModel.LINEAR_RS:
        F = linear_rs_from_atoms(*atoms_from_params(params))
    else:
        F = _build_by_extraction(params)
    if scale:
        F = canonicalize(F)
    return GeneralizedEssential(params.model, F)


def build_linear_rs(params):
    assert params.model is CameraModel.LINEAR_RS
    return build(params)


def build_uniform_rs(params):
    assert params.model is CameraModel.UNIFORM_RS
    return build(params)


def build_linear_pb(params):
    assert params.model is CameraModel.LINEAR_PB
    return build(params)


def build_uniform_pb(params):
    assert params.model is CameraModel.UNIFORM_PB
    return build(params)


# ---------------------------------------------------------------------------
# epipolar curves and variety sampling

@dataclass(frozen=True)
class EpipolarCurve:
    """Sampled epipolar curve in image 2 of a point in image 1."""
    source: np.ndarray
    points: np.ndarray      # (k, 2) samples (u', v')
    degree: int


CURVE_DEGREE = {
    CameraModel.PERSPECTIVE: 1,
    CameraModel.LINEAR_PB: 2,
    CameraModel.LINEAR_RS: 2,
    CameraModel.UNIFORM_PB: 3,
    CameraModel.UNIFORM_RS: 3,
}


def _v2_solve(ge, l1, u2):
    """Solve the (linear in v') residual for v' at given u' values.

    Returns (v2, slope): residual(u2, v2) = 0 where defined.
    """
    base = lift(np.stack([u2, np.zeros_like(u2)], axis=-1), ge.model)
    one = lift(np.stack([u2, np.ones_like(u2)], axis=-1), ge.model)
    Fl1 = ge.F @ l1
    b = base @ Fl1
    a = (one - base) @ Fl1
    with np.errstate(divide="ignore", invalid="ignore"):
        v2 = -b / a
    return v2, a


def sample_epipolar_curve(ge: GeneralizedEssential, point, bounds, n_samples=100):
    """Sample the epipolar curve of one image-1 point over image-2 bounds.

    bounds = (umin, umax, vmin, vmax) in normalized coordinates.  Points
    whose v'-equation is degenerate or out of bounds are dropped.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    umin, umax, vmin, vmax = bounds
    point = np.asarray(point, dtype=float).reshape(2)
    l1 = lift(point, ge.model)
    u2 = np.linspace(umin, umax, n_samples)
    v2, a = _v2_solve(ge, l1, u2)
    ok = np.isfinite(v2) & (np.abs(a) > 1e-12) & (v2 >= vmin) & (v2 <= vmax)
    pts = np.stack([u2[ok], v2[ok]], axis=-1)
    return EpipolarCurve(point, pts, CURVE_DEGREE[ge.model])


def correspondences_on_variety(ge: GeneralizedEssential, n, rng, bound=0.5):
    """Draw n generic correspondences exactly satisfying ge.

    Samples (u, v, u') uniformly and completes v' from the linear residual
    equation; rejects ill-conditioned or out-of-bound completions.
    """
    x1 = np.empty((0, 2))
    x2 = np.empty((0, 2))
    guard = 0
    while len(x1) < n:
        m = max(2 * (n - len(x1)), 16)
        c1 = rng.uniform(-bound, bound, size=(m, 2))
        u2 = rng.uniform(-bound, bound, size=m)
        l1 = lift(c1, ge.model)
        base = lift(np.stack([u2, np.zeros_like(u2)], axis=-1), ge.model)
        one = lift(np.stack([u2, np.ones_like(u2)], axis=-1), ge.model)
        b = np.einsum("ki,ij,kj->k", base, ge.F, l1)
        a = np.einsum("ki,ij,kj->k", one - base, ge.F, l1)
        with np.errstate(divide="ignore", invalid="ignore"):
            v2 = -b / a
        ok = np.isfinite(v2) & (np.abs(a) > 1e-4 * np.linalg.norm(ge.F)) \
            & (np.abs(v2) <= bound)
        x1 = np.vstack([x1, c1[ok]])
        x2 = np.vstack([x2, np.stack([u2[ok], v2[ok]], axis=-1)])
        guard += 1
        if guard > 1000:
            raise RuntimeError("variety sampling failed to converge")
    return x1[:n], x2[:n]


def curves_to_csv(curves, path):
    """Write sampled curves as curve_id,u2,v2 rows."""
    with open(path, "w") as fh:
        fh.write("curve_id,u2,v2\n")
        for cid, c in enumerate(curves):
            for u2, v2 in c.points:
                fh.write(f"{cid},{u2:.17g},{v2:.17g}\n")
