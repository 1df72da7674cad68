"""Generalized Sampson error, nonlinear refinement and minimal-case solvers."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from . import essential as es
from .errors import (ConvergenceFailed, InsufficientPoints,
                     NonFiniteObjective, RsposeError)
from .geometry import rotation_exact, rotation_log
from .models import (CameraModel, MINIMAL_POINTS, MONOMIALS, MotionParams,
                     lift, uses_w)
from .linear import gs_eight_point


@dataclass(frozen=True)
class SampsonConfig:
    max_iter: int = 200
    gradient_tol: float = 1e-14
    step_tol: float = 1e-14
    fd_step: float = 1e-7
    objective_threshold: float = 1e-10   # acceptance level for minimal solves
    restarts: int = 10
    restart_velocity_scale: float = 1e-3
    variant: str = "lifted"               # "lifted" or "jacobian"
    velocity_bound: float | None = None  # box bound on w/d entries (None = free)

    def __post_init__(self):
        for name in ("max_iter", "gradient_tol", "step_tol", "fd_step"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def params_to_vector(params: MotionParams):
    """Flatten to [angle-axis, t, (w1, w2,) d1, d2]."""
    parts = [rotation_log(params.R), params.t]
    if uses_w(params.model):
        parts += [params.w1, params.w2]
    if params.model is not CameraModel.PERSPECTIVE:
        parts += [params.d1, params.d2]
    return np.concatenate(parts)


def vector_to_params(vec, model) -> MotionParams:
    vec = np.asarray(vec, dtype=float)
    R = rotation_exact(vec[0:3])
    t = vec[3:6]
    k = 6
    kw = {}
    if uses_w(model):
        kw["w1"], kw["w2"] = vec[k:k + 3], vec[k + 3:k + 6]
        k += 6
    if model is not CameraModel.PERSPECTIVE:
        kw["d1"], kw["d2"] = vec[k:k + 3], vec[k + 3:k + 6]
        k += 6
    assert k == len(vec)
    return MotionParams(model, R, t, **kw)


def _lift_jacobians(model, pts):
    """d lift / du and d lift / dv stacked over points."""
    u, v = pts[..., 0], pts[..., 1]
    du, dv = [], []
    for a, b in MONOMIALS[model]:
        du.append(a * u ** max(a - 1, 0) * v ** b if a else np.zeros_like(u))
        dv.append(b * u ** a * v ** max(b - 1, 0) if b else np.zeros_like(u))
    return np.stack(du, axis=-1), np.stack(dv, axis=-1)


def sampson_terms(ge: es.GeneralizedEssential, x1, x2, variant="lifted"):
    """Per-correspondence Sampson terms (numerator / denominator).

    "lifted": denominator sums the squares of all lifted components of Fx
    and F^T x'.  "jacobian": chain rule through the monomial lifting, i.e.
    the squared gradient w.r.t. the four image coordinates.
    Degenerate terms (vanishing denominator) are returned as NaN.
    """
    l1 = lift(x1, ge.model)
    l2 = lift(x2, ge.model)
    r = np.einsum("ki,ij,kj->k", l2, ge.F, l1)
    Fl1 = l1 @ ge.F.T
    Ftl2 = l2 @ ge.F
    if variant == "lifted":
        den = np.sum(Fl1 ** 2, axis=-1) + np.sum(Ftl2 ** 2, axis=-1)
    elif variant == "jacobian":
        du1, dv1 = _lift_jacobians(ge.model, x1)
        du2, dv2 = _lift_jacobians(ge.model, x2)
        den = (np.einsum("ki,ki->k", du1, Ftl2) ** 2
               + np.einsum("ki,ki->k", dv1, Ftl2) ** 2
               + np.einsum("ki,ki->k", du2, Fl1) ** 2
               + np.einsum("ki,ki->k", dv2, Fl1) ** 2)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    out = np.full(len(r), np.nan)
    ok = den > 1e-300
    out[ok] = r[ok] ** 2 / den[ok]
    return out


def per_point_sampson(ge, x1, x2, variant="lifted"):
    """Single-summand Sampson statistic per correspondence."""
    return sampson_terms(ge, np.atleast_2d(x1), np.atleast_2d(x2), variant)


def sampson_error(ge, x1, x2, variant="lifted"):
    """Total Sampson error; degenerate terms are skipped."""
    terms = sampson_terms(ge, x1, x2, variant)
    return float(np.nansum(terms))


@dataclass(frozen=True)
class RefineResult:
    params: MotionParams
    objective: float
    initial_objective: float
    n_evaluations: int


def _residual_vector(vec, model, x1, x2, variant, gauge=False):
    params = vector_to_params(vec, model)
    ge = es.build(params, scale=False)
    n = np.linalg.norm(ge.F)
    if n == 0.0 or not np.isfinite(n):
        out = np.full(len(x1) + int(gauge), 1e6)
        return out
    terms = sampson_terms(es.GeneralizedEssential(model, ge.F / n), x1, x2, variant)
    terms = np.nan_to_num(terms, nan=0.0)
    r = np.sqrt(terms)
    if gauge:
        # pins ||t|| = 1 so box bounds on the velocities stay meaningful
        # under the global-scale freedom of the epipolar constraint
        r = np.append(r, np.linalg.norm(vec[3:6]) - 1.0)
    return r


def refine(init: MotionParams, x1, x2, cfg: SampsonConfig = SampsonConfig()) -> RefineResult:
    """Minimize the Sampson error over the motion parameters.

    Trust-region least squares on the square roots of the per-point terms
    with finite-difference Jacobians; the returned objective never exceeds
    the one at init, and the output is gauge fixed ||t|| = 1.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    model = init.model
    v0 = params_to_vector(init)
    kw = {"method": "lm" if len(x1) >= len(v0) else "trf"}
    gauge = False
    if cfg.velocity_bound is not None and len(v0) > 6:
        # velocity entries live past the rotation/translation block; the
        # box prior suppresses the weakly observable common-mode runaway
        b = cfg.velocity_bound
        lo = np.full(len(v0), -np.inf)
        hi = np.full(len(v0), np.inf)
        lo[6:] = -b
        hi[6:] = b
        v0 = np.clip(params_to_vector(init.gauge_fixed()), lo, hi)
        kw = {"method": "trf", "bounds": (lo, hi)}
        gauge = True
    r0 = _residual_vector(v0, model, x1, x2, cfg.variant, gauge)
    obj0 = float(np.sum(r0 ** 2))
    if not np.isfinite(obj0):
        raise NonFiniteObjective("objective not finite at the initial point")
    sol = least_squares(
        _residual_vector, v0, args=(model, x1, x2, cfg.variant, gauge),
        max_nfev=cfg.max_iter * (len(v0) + 1),
        gtol=cfg.gradient_tol, xtol=cfg.step_tol, ftol=cfg.step_tol,
        diff_step=cfg.fd_step, **kw)
    obj = float(2.0 * sol.cost)
    if not np.isfinite(obj):
        raise NonFiniteObjective("objective became non-finite during search")
    if obj <= obj0:
        out = vector_to_params(sol.x, model)
    else:
        out, obj = init, obj0
    return RefineResult(out.gauge_fixed(), obj, obj0, int(sol.nfev))


def minimal_solve(x1, x2, model, cfg: SampsonConfig = SampsonConfig(),
                  seed: int = 0) -> RefineResult:
    """Minimal-case solver: refinement from a global-shutter initialization.

    Starts from the 8-point pose with zero velocities; if the objective
    stays above threshold, restarts with seeded random velocity
    perturbations and keeps the best result.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    n = len(x1)
    if n < MINIMAL_POINTS[model]:
        raise InsufficientPoints(
            f"{model.value} minimal solve needs {MINIMAL_POINTS[model]} points, got {n}")
    base = MotionParams(model, np.eye(3), np.array([1.0, 0.0, 0.0]))
    if n >= 8:
        try:
            pose, _ = gs_eight_point(x1, x2)
            base = MotionParams(model, pose.R, pose.t)
        except RsposeError:
            pass  # fall back to the identity start and rely on restarts
    best = refine(base, x1, x2, cfg)
    if best.objective > cfg.objective_threshold:
        rng = np.random.default_rng(seed)
        for _ in range(cfg.restarts):
            kw = {}
            if model is not CameraModel.PERSPECTIVE:
                kw["d1"] = cfg.restart_velocity_scale * rng.normal(size=3)
                kw["d2"] = cfg.restart_velocity_scale * rng.normal(size=3)
            if uses_w(model):
                kw["w1"] = cfg.restart_velocity_scale * rng.normal(size=3)
                kw["w2"] = cfg.restart_velocity_scale * rng.normal(size=3)
            Rp = rotation_exact(1e-2 * rng.normal(size=3)) @ base.R
            start = MotionParams(model, Rp, base.t, **kw)
            res = refine(start, x1, x2, cfg)
            if res.objective < best.objective:
                best = res
            if best.objective <= cfg.objective_threshold:
                break
    if best.objective > cfg.objective_threshold:
        raise ConvergenceFailed(
            f"best objective {best.objective:.3e} above threshold "
            f"{cfg.objective_threshold:.1e}")
    return best
