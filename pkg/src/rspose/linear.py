"""Linear N-point estimation, atomic essential-matrix recovery, motion extraction."""

from dataclasses import dataclass

import numpy as np

from . import essential as es
from .errors import (CheiralityAmbiguous, DegenerateConfiguration,
                     InsufficientPoints, NearZeroVelocity, NoRealSolution)
from .geometry import skew, unskew
from .models import (CameraModel, LIFT_DIM, LINEAR_POINTS, MotionParams, lift)


@dataclass(frozen=True)
class Tolerances:
    """Central numeric thresholds of the linear pipeline."""
    rank_deficiency: float = 1e-10      # sigma_{n-1}/sigma_1 below -> degenerate
    near_zero_velocity: float = 1e-8    # atom block norm relative to ||F||
    atom_validity: float = 1e-6         # essential-constraint violation on input atoms
    cheirality_majority: float = 0.5


TOL = Tolerances()


@dataclass(frozen=True)
class NormalizationTransform:
    """Affine whitening of lifted vectors: y = [s*(x[:-1] - c); 1]."""
    center: np.ndarray
    scale: float

    def matrix(self):
        m = len(self.center) + 1
        T = np.eye(m)
        T[:-1, :-1] *= self.scale
        T[:-1, -1] = -self.scale * self.center
        return T

    def apply(self, lifted):
        out = lifted.copy()
        out[..., :-1] = self.scale * (lifted[..., :-1] - self.center)
        return out

    def invert(self, lifted):
        out = lifted.copy()
        out[..., :-1] = lifted[..., :-1] / self.scale + self.center
        return out


def _fit_normalization(lifted):
    coords = lifted[..., :-1]
    center = coords.mean(axis=0)
    rms = np.sqrt(np.mean(np.sum((coords - center) ** 2, axis=-1)))
    if rms < 1e-14:
        raise DegenerateConfiguration("all lifted points coincide")
    scale = np.sqrt(coords.shape[-1]) / rms
    return NormalizationTransform(center, scale)


def normalize_lifted(l1, l2):
    """Per-side whitening of lifted point sets (Hartley-style, on monomials)."""
    if len(l1) < 2:
        raise DegenerateConfiguration("need at least 2 points to normalize")
    T1 = _fit_normalization(l1)
    T2 = _fit_normalization(l2)
    return T1.apply(l1), T2.apply(l2), T1, T2


def _support_indices(model):
    m = LIFT_DIM[model]
    if model is CameraModel.PERSPECTIVE:
        return [(i, j) for i in range(m) for j in range(m)]
    return [(i, j) for i in range(m) for j in range(m) if not (i < 2 and j < 2)]


@dataclass(frozen=True)
class LinearSolveResult:
    essential: es.GeneralizedEssential
    cond_ratio: float          # sigma_last / sigma_second_last of A
    singular_values: np.ndarray


def solve_linear(x1, x2, model) -> LinearSolveResult:
    """Estimate F by normalized DLT on the model's monomial support.

    One constraint row per correspondence; F is the least singular vector,
    denormalized and canonically scaled.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    n = len(x1)
    need = LINEAR_POINTS[model]
    if n < need:
        raise InsufficientPoints(f"{model.value} needs {need} points, got {n}")
    l1 = lift(x1, model)
    l2 = lift(x2, model)
    l1n, l2n, T1, T2 = normalize_lifted(l1, l2)
    support = _support_indices(model)
    A = np.stack([l2n[:, i] * l1n[:, j] for i, j in support], axis=1)
    # full matrices: with a minimal point count A has fewer rows than
    # columns and the nullspace vector lives beyond the thin Vt
    _, s, Vt = np.linalg.svd(A, full_matrices=True)
    s = np.concatenate([s, np.zeros(A.shape[1] - len(s))])
    if s[-2] / s[0] < TOL.rank_deficiency:
        raise DegenerateConfiguration(
            f"constraint matrix rank deficient (s[-2]/s[0]={s[-2]/s[0]:.2e})")
    m = LIFT_DIM[model]
    Fn = np.zeros((m, m))
    for (i, j), v in zip(support, Vt[-1]):
        Fn[i, j] = v
    F = T2.matrix().T @ Fn @ T1.matrix()
    return LinearSolveResult(es.GeneralizedEssential(model, es.canonicalize(F)),
                             float(s[-1] / s[-2]), s)


# ---------------------------------------------------------------------------
# atomic recovery (linear RS)

def essential_violation(E):
    """det plus trace-constraint violation, scale-normalized."""
    n = np.linalg.norm(E)
    if n == 0.0:
        return np.inf
    En = E / n
    T = 2.0 * En @ En.T @ En - np.trace(En @ En.T) * En
    return abs(np.linalg.det(En)) + np.linalg.norm(T)


@dataclass(frozen=True)
class AtomicTriple:
    E0: np.ndarray
    E1: np.ndarray
    E2: np.ndarray


def _complete_columns(c1, c2):
    """Candidate third columns lam1*c1 + lam2*c2 making [c1 c2 c3] essential.

    Columns 1-2 of the trace constraint 2EE^T E - tr(EE^T)E are exactly
    quadratic-plus-constant in (lam1, lam2); two of those six scalar
    equations determine (lam1^2, lam1*lam2, lam2^2) up to a one-parameter
    family closed by the rank-1 consistency condition.
    """
    # work at unit scale: the completion is homogeneous of degree 1 in
    # (c1, c2) while the constraint coefficients are cubic
    scale = np.sqrt(c1 @ c1 + c2 @ c2)
    if scale < 1e-300:
        raise DegenerateConfiguration("zero columns in completion")
    c1 = c1 / scale
    c2 = c2 / scale
    A = np.outer(c1, c1) + np.outer(c2, c2)
    const = {}
    quad = {}
    for k, ck in enumerate((c1, c2)):
        const[k] = 2.0 * A @ ck - np.trace(A) * ck
        q11 = 2.0 * c1 * (c1 @ ck) - (c1 @ c1) * ck
        q12 = 2.0 * (c1 * (c2 @ ck) + c2 * (c1 @ ck)) - 2.0 * (c1 @ c2) * ck
        q22 = 2.0 * c2 * (c2 @ ck) - (c2 @ c2) * ck
        quad[k] = np.stack([q11, q12, q22], axis=-1)   # (3 rows, 3 coeffs)
    Q = np.vstack([quad[0], quad[1]])                  # (6, 3)
    c = np.concatenate([const[0], const[1]])           # (6,)
    norms = np.linalg.norm(np.hstack([Q, c[:, None]]), axis=1)
    order = np.argsort(norms)[::-1]
    i1, i2 = order[0], order[1]
    Q2 = Q[[i1, i2]]
    c2v = c[[i1, i2]]
    # solution family p = p0 + s*nvec of Q2 p = -c, then enforce p0*p2 = p1^2
    p0, *_ = np.linalg.lstsq(Q2, -c2v, rcond=None)
    _, sv, Vt = np.linalg.svd(Q2)
    if sv[0] < 1e-300 or sv[-1] < 1e-12 * sv[0]:
        raise DegenerateConfiguration("lambda system rank deficient")
    nvec = Vt[-1]
    # (p0[0]+s n0)(p0[2]+s n2) = (p0[1]+s n1)^2
    a = nvec[0] * nvec[2] - nvec[1] ** 2
    b = p0[0] * nvec[2] + p0[2] * nvec[0] - 2.0 * p0[1] * nvec[1]
    cc = p0[0] * p0[2] - p0[1] ** 2
    roots = np.roots([a, b, cc]) if abs(a) > 1e-300 else np.roots([b, cc])
    lams = []
    for r in roots:
        if abs(r.imag) > 1e-8 * (1.0 + abs(r.real)):
            continue
        p = p0 + r.real * nvec
        p1 = max(p[0], 0.0)
        p3 = max(p[2], 0.0)
        l1v = np.sqrt(p1)
        if l1v > 1e-12:
            l2v = p[1] / l1v
        else:
            l2v = np.sqrt(p3)
        lams.extend([(l1v, l2v), (-l1v, -l2v)])
    if not lams:
        raise NoRealSolution("no real root for the quadratic completion")
    return [scale * (lam1 * c1 + lam2 * c2) for lam1, lam2 in lams]


def _best_completion(c1, c2):
    cands = _complete_columns(c1, c2)
    mats = [np.stack([c1, c2, c3], axis=-1) for c3 in cands]
    viol = [essential_violation(E) for E in mats]
    order = np.argsort(viol)
    return [mats[i] for i in order]


def recover_atoms(ge: es.GeneralizedEssential, tol: Tolerances = TOL) -> AtomicTriple:
    """Recover (E0, E1, E2) from a 5x5 linear RS essential matrix.

    E1's first two columns and E2's first two rows are read off F; the
    missing column/row is completed through the rank-2 and trace
    constraints, and E0 follows from the coupled sums.  All real candidate
    completions are ranked by total constraint violation.
    """
    assert ge.model is CameraModel.LINEAR_RS
    F = ge.F
    normF = np.linalg.norm(F)
    E1c = np.stack([-F[2:5, 0], -F[2:5, 1]], axis=-1)   # E1 columns 1-2
    E2r = np.stack([F[0, 2:5], F[1, 2:5]], axis=0)      # E2 rows 1-2
    if np.linalg.norm(E1c) < tol.near_zero_velocity * normF or \
       np.linalg.norm(E2r) < tol.near_zero_velocity * normF:
        raise NearZeroVelocity("velocity atom blocks are numerically zero")
    E1_cands = _best_completion(E1c[:, 0], E1c[:, 1])
    # rows of E2 are columns of E2^T, which satisfies the same constraints
    E2_cands = [E.T for E in _best_completion(E2r[0], E2r[1])]

    def assemble(E1, E2):
        E0 = np.zeros((3, 3))
        E0[1, 1] = F[3, 3]
        E0[1, 2] = F[3, 4]
        E0[2, 1] = F[4, 3]
        E0[2, 2] = F[4, 4]
        E0[0, 0] = F[2, 2] - E2[2, 0] + E1[0, 2]
        E0[0, 1] = F[2, 3] - E2[2, 1]
        E0[0, 2] = F[2, 4] - E2[2, 2]
        E0[1, 0] = F[3, 2] + E1[1, 2]
        E0[2, 0] = F[4, 2] + E1[2, 2]
        return E0

    best = None
    for E1 in E1_cands[:4]:
        for E2 in E2_cands[:4]:
            E0 = assemble(E1, E2)
            v = essential_violation(E0) + essential_violation(E1) \
                + essential_violation(E2)
            if best is None or v < best[0]:
                best = (v, AtomicTriple(E0, E1, E2))
    return best[1]


# ---------------------------------------------------------------------------
# motion extraction

_W = np.array([[0.0, -1.0, 0.0],
               [1.0, 0.0, 0.0],
               [0.0, 0.0, 1.0]])


def _pose_candidates(E):
    U, _, Vt = np.linalg.svd(E)
    if np.linalg.det(U) < 0:
        U = -U
    if np.linalg.det(Vt) < 0:
        Vt = -Vt
    R1 = U @ _W @ Vt
    R2 = U @ _W.T @ Vt
    t = U[:, 2]
    return [(R1, t), (R1, -t), (R2, t), (R2, -t)]


def triangulate(R, t, x1, x2):
    """Linear triangulation under reference poses [I,0] and [R,t]."""
    P2 = np.hstack([R, t.reshape(3, 1)])
    X = np.empty((len(x1), 3))
    for i, (p, q) in enumerate(zip(x1, x2)):
        A = np.array([
            [-1.0, 0.0, p[0], 0.0],
            [0.0, -1.0, p[1], 0.0],
            P2[0] - q[0] * P2[2],
            P2[1] - q[1] * P2[2],
        ])
        _, _, Vt = np.linalg.svd(A)
        Xh = Vt[-1]
        X[i] = Xh[:3] / Xh[3]
    return X


def _cheirality_counts(R, t, x1, x2):
    X = triangulate(R, t, x1, x2)
    z1 = X[:, 2]
    z2 = (X @ R.T + t)[:, 2]
    return int(np.sum((z1 > 0) & (z2 > 0)))


def select_pose(E, x1, x2, tol: Tolerances = TOL):
    """Resolve the four-fold (twisted pair / sign) ambiguity by cheirality."""
    cands = _pose_candidates(E)
    counts = [_cheirality_counts(R, t, x1, x2) for R, t in cands]
    k = int(np.argmax(counts))
    if counts[k] <= tol.cheirality_majority * len(x1):
        raise CheiralityAmbiguous(
            f"best candidate has {counts[k]}/{len(x1)} points in front")
    return cands[k]


def decompose_atoms(atoms: AtomicTriple, x1, x2, tol: Tolerances = TOL,
                    strict: bool = True) -> MotionParams:
    """Extract (R, t, d1, d2) from the atomic triple.

    Cheirality on the reference scanline cameras selects among the four
    E0 decompositions; velocities come from the skew parts of Ei R^T,
    undoing the d1 <- R d1 redefinition.  Output is gauge fixed ||t|| = 1
    with the velocity scales preserved relative to t.  strict=False skips
    the validity gate for best-effort decomposition of noisy input.
    """
    if strict:
        for E in (atoms.E0, atoms.E1, atoms.E2):
            if essential_violation(E) > tol.atom_validity:
                raise DegenerateConfiguration("atom fails essential-matrix validity")
    R, t_unit = select_pose(atoms.E0, x1, x2, tol)
    E0, E1, E2 = atoms.E0, atoms.E1, atoms.E2
    t_raw = unskew(E0 @ R.T)
    if t_raw @ t_unit < 0:
        E0, E1, E2 = -E0, -E1, -E2
        t_raw = -t_raw
    scale = np.linalg.norm(t_raw)
    if scale < 1e-14:
        raise DegenerateConfiguration("zero baseline in E0")
    d1 = R.T @ unskew(E1 @ R.T) / scale
    d2 = unskew(E2 @ R.T) / scale
    return MotionParams(CameraModel.LINEAR_RS, R, t_raw / scale,
                        d1=d1, d2=d2)


def solve_20pt(x1, x2, strict: bool = True) -> MotionParams:
    """Full linear 20-point pipeline for the linear RS camera."""
    res = solve_linear(x1, x2, CameraModel.LINEAR_RS)
    atoms = recover_atoms(res.essential)
    return decompose_atoms(atoms, x1, x2, strict=strict)


def project_to_essential(F):
    """Nearest matrix with singular values (s, s, 0)."""
    U, S, Vt = np.linalg.svd(F)
    s = 0.5 * (S[0] + S[1])
    return U @ np.diag([s, s, 0.0]) @ Vt


def gs_eight_point(x1, x2):
    """Global-shutter 8-point algorithm with cheirality disambiguation.

    Returns (MotionParams(perspective), essential matrix).
    """
    res = solve_linear(x1, x2, CameraModel.PERSPECTIVE)
    E = project_to_essential(res.essential.F)
    R, t = select_pose(E, x1, x2)
    return MotionParams(CameraModel.PERSPECTIVE, R, t), es.GeneralizedEssential(
        CameraModel.PERSPECTIVE, es.canonicalize(E))
