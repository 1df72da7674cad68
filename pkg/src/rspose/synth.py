"""Geometrically consistent synthetic RS/PB data, error metrics and sweeps."""

import csv
import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import essential as es
from . import linear as lin
from . import nonlinear as nl
from .errors import FrustumExhausted, RsposeError, ZeroVector
from .geometry import rotation_exact, rotation_log, rotation_small
from .models import CameraModel, MotionParams, is_pushbroom, uses_d, uses_w


@dataclass(frozen=True)
class SceneConfig:
    """Configuration of one synthetic two-view scene."""
    model: CameraModel = CameraModel.LINEAR_RS
    focal: float = 640.0
    image_size: tuple = (640, 480)
    n_points: int = 100
    depth_range: tuple = (2.0, 8.0)
    noise: float = 0.0                 # sigma on the normalized image plane
    d_scale: float = 1e-3              # |d| per normalized row unit
    w_scale: float = 1e-4              # |w| (rad) per normalized row unit
    max_rotation: float = 0.5          # rad, relative pose
    trials: int = 200
    seed: int = 0
    rotation_mode: str = "exact"       # scanline rotation model for generation
    pb_sweep: float | None = None      # dominant PB sweep speed (auto if None)

    def bounds(self):
        """Half-extents of the normalized image plane (u, v)."""
        w, h = self.image_size
        return 0.5 * w / self.focal, 0.5 * h / self.focal


@dataclass(frozen=True)
class SyntheticTrial:
    correspondences: tuple      # (x1, x2) arrays of normalized (u, v)
    params: MotionParams        # ground truth
    points: np.ndarray          # (n, 3) ground-truth 3D positions
    config: SceneConfig


def _scanline_rotmat(w, u, mode):
    if mode == "exact":
        return rotation_exact(w, u)
    return rotation_small(w, u)


def _project_rs(R0, t0, w, d, X, mode, u_bound, tol=1e-12):
    """Rolling-shutter projection: solve u = first coord of the projection.

    Damped fixed-point iteration with a bisection fallback on the scalar
    row equation; returns (u, v, ok).
    """
    def cam(u):
        return _scanline_rotmat(w, u, mode) @ R0 @ X + t0 + u * d

    u = 0.0
    xc = cam(u)
    if xc[2] <= 0:
        return 0.0, 0.0, False
    u = xc[0] / xc[2]
    for _ in range(60):
        xc = cam(u)
        if xc[2] <= 0:
            return 0.0, 0.0, False
        u_new = xc[0] / xc[2]
        if abs(u_new - u) < tol:
            v = xc[1] / xc[2]
            return u_new, v, True
        u = u_new
    # fixed point did not settle: bisect g(u) = xc[0] - u*xc[2]
    def g(u):
        xc = cam(u)
        return xc[0] - u * xc[2]
    lo, hi = -2.0 * u_bound, 2.0 * u_bound
    glo, ghi = g(lo), g(hi)
    if glo * ghi > 0:
        return 0.0, 0.0, False
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if glo * gm <= 0:
            hi, ghi = mid, gm
        else:
            lo, glo = mid, gm
    u = 0.5 * (lo + hi)
    xc = cam(u)
    if xc[2] <= 0:
        return 0.0, 0.0, False
    return u, xc[1] / xc[2], True


def _project_pb(R0, t0, w, d, X, mode, u_bound, tol=1e-12):
    """Push-broom projection: solve the view-plane crossing (x-coord zero)."""
    def cam(u):
        return _scanline_rotmat(w, u, mode) @ R0 @ X + t0 + u * d

    def g(u):
        return cam(u)[0]

    lo, hi = -2.0 * u_bound, 2.0 * u_bound
    glo, ghi = g(lo), g(hi)
    if glo * ghi > 0:
        return 0.0, 0.0, False
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if abs(hi - lo) < tol:
            break
        if glo * gm <= 0:
            hi, ghi = mid, gm
        else:
            lo, glo = mid, gm
    u = 0.5 * (lo + hi)
    xc = cam(u)
    if xc[2] <= 0:
        return 0.0, 0.0, False
    return u, xc[1] / xc[2], True


def project_point(params, frame, X, mode="exact", u_bound=0.5):
    """Project a 3D point into frame 1 or 2 under the scanline model."""
    if frame == 1:
        R0, t0, w, d = np.eye(3), np.zeros(3), params.w1, params.d1
    else:
        R0, t0, w, d = params.R, params.t, params.w2, params.d2
    if is_pushbroom(params.model):
        return _project_pb(R0, t0, w, d, X, mode, u_bound)
    return _project_rs(R0, t0, w, d, X, mode, u_bound)


def _random_unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_params(cfg: SceneConfig, rng) -> MotionParams:
    """Draw a random pose and velocities for cfg.model."""
    angle = rng.uniform(0.0, cfg.max_rotation)
    R = rotation_exact(angle * _random_unit(rng))
    t = _random_unit(rng)
    kw = {}
    if uses_d(cfg.model):
        if is_pushbroom(cfg.model):
            sweep = cfg.pb_sweep if cfg.pb_sweep is not None \
                else 0.5 * sum(cfg.depth_range)
            kw["d1"] = np.array([sweep, 0.0, 0.0]) + cfg.d_scale * rng.normal(size=3)
            kw["d2"] = np.array([sweep, 0.0, 0.0]) + cfg.d_scale * rng.normal(size=3)
        else:
            kw["d1"] = cfg.d_scale * _random_unit(rng)
            kw["d2"] = cfg.d_scale * _random_unit(rng)
    if uses_w(cfg.model):
        kw["w1"] = cfg.w_scale * _random_unit(rng)
        kw["w2"] = cfg.w_scale * _random_unit(rng)
    return MotionParams(cfg.model, R, t, **kw)


def _pose_sees_scene(params, cfg):
    """Quick overlap check: scene center visible in both frames."""
    ub, vb = cfg.bounds()
    zc = 0.5 * sum(cfg.depth_range)
    X = np.array([0.0, 0.0, zc])
    for frame in (1, 2):
        u, v, ok = project_point(params, frame, X, cfg.rotation_mode, ub)
        if not ok or abs(u) > ub or abs(v) > vb:
            return False
    return True


def generate(cfg: SceneConfig, rng=None) -> SyntheticTrial:
    """Generate one geometrically consistent trial.

    Points are sampled uniformly in the frame-1 frustum, projected by
    solving the per-point scanline fixed point in both frames, then noise
    is added on the normalized image plane.  Failing points (cheirality,
    bounds, non-convergence) are resampled up to 100x the requested count.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    ub, vb = cfg.bounds()
    for _pose_try in range(50):
        params = random_params(cfg, rng)
        if _pose_sees_scene(params, cfg):
            break
    else:
        raise FrustumExhausted("no overlapping pose found")
    pts1, pts2, X_all = [], [], []
    budget = 100 * cfg.n_points
    tried = 0
    while len(pts1) < cfg.n_points:
        if tried >= budget:
            raise FrustumExhausted(
                f"resampling budget exhausted ({len(pts1)}/{cfg.n_points})")
        tried += 1
        z = rng.uniform(*cfg.depth_range)
        if is_pushbroom(cfg.model):
            # sweep axis is x: place points across the swept volume so the
            # view-plane crossing lands inside the scan range
            x = rng.uniform(-0.9 * ub, 0.9 * ub) * params.d1[0]
            y = rng.uniform(-vb, vb) * z
            X = np.array([x, y, z])
        else:
            X = np.array([rng.uniform(-ub, ub) * z, rng.uniform(-vb, vb) * z, z])
        u1, v1, ok1 = project_point(params, 1, X, cfg.rotation_mode, ub)
        if not ok1 or abs(u1) > ub or abs(v1) > vb:
            continue
        u2, v2, ok2 = project_point(params, 2, X, cfg.rotation_mode, ub)
        if not ok2 or abs(u2) > ub or abs(v2) > vb:
            continue
        pts1.append((u1, v1))
        pts2.append((u2, v2))
        X_all.append(X)
    x1 = np.array(pts1)
    x2 = np.array(pts2)
    if cfg.noise > 0:
        x1 = x1 + rng.normal(scale=cfg.noise, size=x1.shape)
        x2 = x2 + rng.normal(scale=cfg.noise, size=x2.shape)
    return SyntheticTrial((x1, x2), params, np.array(X_all), cfg)


# ---------------------------------------------------------------------------
# error metrics

def error_rotation(R_est, R_gt):
    """Geodesic rotation error in radians."""
    c = np.clip((np.trace(R_est @ R_gt.T) - 1.0) / 2.0, -1.0, 1.0)
    return float(np.arccos(c))


def error_translation(t_est, t_gt, signed=False):
    """Angle between translation directions; sign-invariant by default."""
    t_est = np.asarray(t_est, dtype=float)
    t_gt = np.asarray(t_gt, dtype=float)
    n1 = np.linalg.norm(t_est)
    n2 = np.linalg.norm(t_gt)
    if n1 == 0.0 or n2 == 0.0:
        raise ZeroVector("translation direction undefined for zero vector")
    c = float(t_est @ t_gt) / (n1 * n2)
    if not signed:
        c = abs(c)
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def vec_angle(F_est, F_gt):
    """Sign-invariant angle between vectorized matrices."""
    a = F_est.ravel() / np.linalg.norm(F_est)
    b = F_gt.ravel() / np.linalg.norm(F_gt)
    return float(np.arccos(np.clip(abs(a @ b), -1.0, 1.0)))


def direction_error(v_est, v_gt):
    n1, n2 = np.linalg.norm(v_est), np.linalg.norm(v_gt)
    if n1 == 0.0 or n2 == 0.0:
        raise ZeroVector("zero-length velocity")
    return float(np.arccos(np.clip(v_est @ v_gt / (n1 * n2), -1.0, 1.0)))


# ---------------------------------------------------------------------------
# sweep experiments

@dataclass
class ExperimentReport:
    kind: str
    rows: list = field(default_factory=list)   # dict per (value, trial, label)
    aggregates: dict = field(default_factory=dict)

    def add(self, value, trial, label, e_R=np.nan, e_T=np.nan,
            F_angle=np.nan, status="ok"):
        self.rows.append({"sweep_value": value, "trial": trial, "model": label,
                          "e_R": e_R, "e_T": e_T, "F_angle": F_angle,
                          "status": status})

    def aggregate(self):
        keys = sorted({(r["sweep_value"], r["model"]) for r in self.rows})
        agg = {}
        for value, label in keys:
            sel = [r for r in self.rows
                   if r["sweep_value"] == value and r["model"] == label
                   and r["status"] == "ok"]
            entry = {"n_ok": len(sel)}
            for m in ("e_R", "e_T", "F_angle"):
                vals = np.array([r[m] for r in sel], dtype=float)
                vals = vals[np.isfinite(vals)]
                if len(vals):
                    entry[m] = {"median": float(np.median(vals)),
                                "q25": float(np.percentile(vals, 25)),
                                "q75": float(np.percentile(vals, 75))}
            agg[f"{value}|{label}"] = entry
        self.aggregates = agg
        return agg

    def median(self, value, label, metric):
        return self.aggregates[f"{value}|{label}"][metric]["median"]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.DictWriter(fh, fieldnames=["sweep_value", "trial", "model",
                                                "e_R", "e_T", "F_angle", "status"])
            wr.writeheader()
            wr.writerows(self.rows)

    def to_json(self, path):
        if not self.aggregates:
            self.aggregate()
        with open(path, "w") as fh:
            json.dump({"kind": self.kind, "aggregates": self.aggregates}, fh, indent=2)


def _solve_gs(trial, scfg):
    x1, x2 = trial.correspondences
    pose, _ = lin.gs_eight_point(x1, x2)
    refined = nl.refine(pose, x1, x2, scfg).params
    return refined, None


def _solve_rs_linear(trial, scfg):
    # best-effort decomposition; the F-angle metric uses the raw DLT fit
    x1, x2 = trial.correspondences
    res = lin.solve_linear(x1, x2, CameraModel.LINEAR_RS)
    atoms = lin.recover_atoms(res.essential)
    params = lin.decompose_atoms(atoms, x1, x2, strict=False)
    return params, res.essential.F


def _solve_rs_refine(trial, scfg):
    x1, x2 = trial.correspondences
    pose, _ = lin.gs_eight_point(x1, x2)
    init = MotionParams(trial.params.model, pose.R, pose.t)
    return nl.refine(init, x1, x2, scfg).params, None


_SOLVERS = {
    "gs": _solve_gs,
    "rs_linear": _solve_rs_linear,
    "rs_refine": _solve_rs_refine,
}


def _apply_sweep(cfg, kind, value):
    if kind == "noise":
        return replace(cfg, noise=value)
    if kind == "focal":
        return replace(cfg, focal=value)
    if kind == "velocity":
        return replace(cfg, d_scale=value)
    raise ValueError(f"unknown sweep kind {kind!r}")


def run_sweep(kind, grid, cfg: SceneConfig, solvers=("gs", "rs_refine"),
              sampson_cfg: nl.SampsonConfig = nl.SampsonConfig()) -> ExperimentReport:
    """Sweep one generator parameter, solving every trial with each solver.

    Each (grid value, trial) pair derives its own seed from cfg.seed so
    runs are reproducible and order independent.  Per-trial solver errors
    are recorded in the status column, not raised.
    """
    if len(grid) == 0:
        raise ValueError("empty sweep grid")
    report = ExperimentReport(kind)
    for gi, value in enumerate(grid):
        cfg_v = _apply_sweep(cfg, kind, value)
        for trial_idx in range(cfg.trials):
            rng = np.random.default_rng((cfg.seed, gi, trial_idx))
            try:
                trial = generate(cfg_v, rng)
            except RsposeError as exc:
                for label in solvers:
                    report.add(value, trial_idx, label,
                               status=type(exc).__name__)
                continue
            gt = trial.params
            F_gt = es.build(gt).F
            for label in solvers:
                try:
                    est, F_est = _SOLVERS[label](trial, sampson_cfg)
                    fa = np.nan
                    if F_est is not None:
                        fa = vec_angle(F_est, F_gt)
                    elif est.model == gt.model:
                        fa = vec_angle(es.build(est).F, F_gt)
                    report.add(value, trial_idx, label,
                               e_R=error_rotation(est.R, gt.R),
                               e_T=error_translation(est.t, gt.t),
                               F_angle=fa)
                except RsposeError as exc:
                    report.add(value, trial_idx, label,
                               status=type(exc).__name__)
    report.aggregate()
    return report
