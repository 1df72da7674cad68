"""RANSAC around the minimal/nonlinear solvers with Sampson inlier tests."""

from dataclasses import dataclass

import numpy as np

from . import essential as es
from . import nonlinear as nl
from .errors import InsufficientPoints, NoConsensus, RsposeError
from .linear import gs_eight_point, solve_20pt
from .models import CameraModel, LINEAR_POINTS, MINIMAL_POINTS, MotionParams


@dataclass(frozen=True)
class RansacConfig:
    threshold: float = 1e-6        # squared Sampson term, normalized coords
    gs_threshold: float | None = None   # consensus-stage threshold; None = 100x
    max_iter: int = 1000
    confidence: float = 0.999
    seed: int = 0
    refit_rounds: int = 10         # refine/re-classify fixed-point iterations
    rs_minimal_sampling: bool = False   # sample RS minimal sets instead of GS

    def __post_init__(self):
        if self.threshold <= 0:
            raise ValueError("threshold must be positive")
        if self.gs_threshold is not None and self.gs_threshold <= 0:
            raise ValueError("gs_threshold must be positive")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError("confidence must be in (0, 1)")


@dataclass(frozen=True)
class RansacResult:
    params: MotionParams
    inliers: np.ndarray            # boolean mask
    iterations: int
    sampson_error: float           # over final inliers, RS model


def _adaptive_bound(inlier_ratio, sample_size, confidence):
    if inlier_ratio <= 0.0:
        return np.inf
    denom = np.log1p(-min(inlier_ratio ** sample_size, 1.0 - 1e-12))
    return np.log(1.0 - confidence) / denom


def ransac(x1, x2, model, rcfg: RansacConfig = RansacConfig(),
           cfg: nl.SampsonConfig = nl.SampsonConfig()) -> RansacResult:
    """Robust relative pose for `model` from contaminated correspondences.

    Hypotheses come from the global-shutter 8-point solver on random
    samples (the RS model has too many DOF to sample economically), so the
    consensus stage uses a looser threshold (gs_threshold) that absorbs
    the unmodeled RS displacement.  The RS model enters after the loop:
    refine on the consensus set, re-classify every point with the RS
    Sampson term at the tight threshold, and iterate to a fixed point.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    n = len(x1)
    sample_size = MINIMAL_POINTS[model] if rcfg.rs_minimal_sampling else 8
    if n < sample_size:
        raise InsufficientPoints(
            f"need at least {sample_size} points, got {n}")
    gs_threshold = rcfg.gs_threshold
    if gs_threshold is None:
        gs_threshold = 100.0 * rcfg.threshold
    rng = np.random.default_rng(rcfg.seed)
    best_mask = None
    best_count = 0
    iters = 0
    bound = rcfg.max_iter
    while iters < min(bound, rcfg.max_iter):
        iters += 1
        idx = rng.choice(n, size=sample_size, replace=False)
        try:
            if rcfg.rs_minimal_sampling:
                hyp = nl.minimal_solve(x1[idx], x2[idx], model, cfg,
                                       seed=rcfg.seed + iters).params
                ge = es.build(hyp)
            else:
                hyp, ge = gs_eight_point(x1[idx], x2[idx])
        except RsposeError:
            continue
        terms = nl.per_point_sampson(ge, x1, x2)
        mask = np.nan_to_num(terms, nan=np.inf) < gs_threshold
        count = int(mask.sum())
        if count > best_count:
            best_count = count
            best_mask = mask
            bound = _adaptive_bound(count / n, sample_size, rcfg.confidence)
    if best_mask is None or best_count < 2 * sample_size:
        raise NoConsensus(f"best consensus {best_count}/{n} too small")

    # RS stage: refine on the consensus, re-classify, iterate to fixed point
    pose, _ = gs_eight_point(x1[best_mask], x2[best_mask])
    params = MotionParams(model, pose.R, pose.t)
    mask = best_mask
    result = None
    for _ in range(max(rcfg.refit_rounds, 1)):
        result = nl.refine(params, x1[mask], x2[mask], cfg)
        params = result.params
        # the Sampson objective is nearly flat along common-mode velocity
        # directions; the linear motion solver pins them, so keep its fit
        # whenever it scores at least as well on the current inliers
        if model is CameraModel.LINEAR_RS and mask.sum() >= LINEAR_POINTS[model]:
            try:
                lin_params = solve_20pt(x1[mask], x2[mask], strict=False)
                if (nl.sampson_error(es.build(lin_params), x1[mask], x2[mask])
                        <= nl.sampson_error(es.build(params), x1[mask], x2[mask])):
                    params = lin_params
            except RsposeError:
                pass
        terms = nl.per_point_sampson(es.build(params), x1, x2)
        new_mask = np.nan_to_num(terms, nan=np.inf) < rcfg.threshold
        if new_mask.sum() < sample_size:
            break
        if np.array_equal(new_mask, mask):
            mask = new_mask
            break
        mask = new_mask
    err = nl.sampson_error(es.build(params), x1[mask], x2[mask])
    return RansacResult(params, mask, iters, err)
