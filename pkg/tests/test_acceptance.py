"""End-to-end acceptance suite.

Each test checks one shipped claim and prints exactly one pass/fail line,
visible even under pytest output capture.  Run the whole file with:

    pytest tests/test_acceptance.py -v
"""

import time

import numpy as np
import pytest

from rspose import essential as es
from rspose import linear as lin
from rspose import nonlinear as nl
from rspose import robust
from rspose.errors import NearZeroVelocity
from rspose.models import CameraModel, LINEAR_POINTS, MotionParams
from rspose.synth import (SceneConfig, direction_error, error_rotation,
                          error_translation, generate, random_params,
                          run_sweep, vec_angle)

LIFTED_MODELS = [CameraModel.LINEAR_PB, CameraModel.LINEAR_RS,
                 CameraModel.UNIFORM_PB, CameraModel.UNIFORM_RS]


_CAPSYS = None


@pytest.fixture(autouse=True)
def _live_output(capsys):
    # lets _report print through pytest's output capture
    global _CAPSYS
    _CAPSYS = capsys
    yield
    _CAPSYS = None


def _report(num, name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    line = f"[{status}] criterion {num:02d} {name}: {detail}"
    if _CAPSYS is not None:
        with _CAPSYS.disabled():
            print(line, flush=True)
    else:
        print(line, flush=True)
    return ok


def _draw(model, seed, d_scale, w_scale):
    rng = np.random.default_rng(seed)
    cfg = SceneConfig(model=model, d_scale=d_scale, w_scale=w_scale)
    return random_params(cfg, rng)


def test_criterion_01_exact_recovery():
    # 200 generic draws per lifted model; the linear solver must return the
    # generating bilinear form exactly from noise-free correspondences
    t0 = time.time()
    worst = 0.0
    fails = 0
    for model in LIFTED_MODELS:
        n_pts = LINEAR_POINTS[model] + 10
        for seed in range(200):
            p = _draw(model, (1, LIFTED_MODELS.index(model), seed), 0.1, 0.1)
            ge = es.build(p)
            rng = np.random.default_rng((2, seed))
            x1, x2 = es.correspondences_on_variety(ge, n_pts, rng)
            ang = vec_angle(lin.solve_linear(x1, x2, model).essential.F, ge.F)
            worst = max(worst, ang)
            fails += ang > 1e-6
    elapsed = time.time() - t0
    ok = fails == 0 and elapsed <= 60.0
    assert _report(1, "exact_recovery", ok,
                   f"4 models x 200 draws, worst angle {worst:.2e} rad, "
                   f"{fails} over 1e-6, {elapsed:.1f}s")


def test_criterion_02_atom_roundtrip():
    # common-scale-aligned atom recovery plus the zero-velocity guard
    worst = 0.0
    for seed in range(200):
        p = _draw(CameraModel.LINEAR_RS, (3, seed), 0.05, 0.0)
        gt = np.concatenate([a.ravel() for a in es.atoms_from_params(p)])
        at = lin.recover_atoms(es.build(p))
        est = np.concatenate([a.ravel() for a in (at.E0, at.E1, at.E2)])
        scale = (est @ gt) / (est @ est)
        worst = max(worst, np.abs(scale * est - gt).max())
    raised = False
    zero_d = MotionParams(CameraModel.LINEAR_RS, np.eye(3),
                          np.array([1.0, 0.0, 0.0]))
    try:
        lin.recover_atoms(es.build(zero_d))
    except NearZeroVelocity:
        raised = True
    ok = worst <= 1e-7 and raised
    assert _report(2, "atom_roundtrip", ok,
                   f"200 draws, worst aligned error {worst:.2e}, "
                   f"zero-velocity raise={raised}")


def test_criterion_03_end_to_end_20pt():
    # full motion recovery from the 20-point chain on noise-free trials
    n_good = 0
    trials = 200
    for trial_idx in range(trials):
        rng = np.random.default_rng((4, trial_idx))
        tr = generate(SceneConfig(model=CameraModel.LINEAR_RS, n_points=40), rng)
        x1, x2 = tr.correspondences
        gt = tr.params
        try:
            p = lin.solve_20pt(x1, x2)
        except Exception:
            continue
        n_good += (error_rotation(p.R, gt.R) <= 1e-5
                   and error_translation(p.t, gt.t) <= 1e-5
                   and direction_error(p.d1, gt.d1) <= 1e-4
                   and direction_error(p.d2, gt.d2) <= 1e-4)
    ok = n_good >= 0.99 * trials
    assert _report(3, "end_to_end_20pt", ok, f"{n_good}/{trials} trials good")


def test_criterion_04_noise_trend():
    # linear solver error must grow monotonically with noise, roughly
    # proportionally on a log-log scale
    grid = [1e-6, 1e-5, 1e-4, 1e-3]
    cfg = SceneConfig(model=CameraModel.LINEAR_RS, d_scale=0.3,
                      n_points=100, trials=200, seed=0)
    rep = run_sweep("noise", grid, cfg, solvers=("rs_linear",))
    med = [rep.median(v, "rs_linear", "F_angle") for v in grid]
    mono = all(b >= a for a, b in zip(med, med[1:]))
    slope = np.polyfit(np.log10(grid), np.log10(med), 1)[0]
    ok = mono and 0.5 <= slope <= 1.5
    assert _report(4, "noise_trend", ok,
                   f"medians {['%.2e' % m for m in med]}, "
                   f"monotone={mono}, slope {slope:.2f}")


_WIDE_FOV_SAMPSON = nl.SampsonConfig(velocity_bound=0.05, variant="jacobian")


def test_criterion_05_rs_beats_gs():
    # with a wide field of view the scanline-aware refinement must beat
    # the constant-pose fit at matched noise
    cfg = SceneConfig(model=CameraModel.UNIFORM_RS, focal=80.0,
                      n_points=100, d_scale=1e-2, w_scale=1e-2,
                      trials=200, seed=0)
    rep = run_sweep("noise", [2e-3], cfg, solvers=("gs", "rs_refine"),
                    sampson_cfg=_WIDE_FOV_SAMPSON)
    gs_R = rep.median(2e-3, "gs", "e_R")
    gs_T = rep.median(2e-3, "gs", "e_T")
    rs_R = rep.median(2e-3, "rs_refine", "e_R")
    rs_T = rep.median(2e-3, "rs_refine", "e_T")
    ok = rs_R < gs_R and rs_T < gs_T
    assert _report(5, "rs_beats_gs", ok,
                   f"e_R rs {rs_R:.2e} vs gs {gs_R:.2e}, "
                   f"e_T rs {rs_T:.2e} vs gs {gs_T:.2e}")


def test_criterion_06_velocity_observability():
    # the advantage of modeling the scanline motion must grow with the
    # actual per-row velocity
    cfg = SceneConfig(model=CameraModel.LINEAR_RS, focal=80.0, noise=5e-3,
                      n_points=100, trials=200, seed=0)
    rep = run_sweep("velocity", [1e-4, 1e-2], cfg,
                    solvers=("gs", "rs_refine"),
                    sampson_cfg=_WIDE_FOV_SAMPSON)
    gap = {v: rep.median(v, "gs", "e_R") - rep.median(v, "rs_refine", "e_R")
           for v in (1e-4, 1e-2)}
    ok = gap[1e-2] > gap[1e-4]
    assert _report(6, "velocity_observability", ok,
                   f"gap(1e-2)={gap[1e-2]:+.2e} vs gap(1e-4)={gap[1e-4]:+.2e}")


def test_criterion_07_hierarchy_reductions():
    rng = np.random.default_rng(5)
    pts1 = rng.uniform(-0.5, 0.5, size=(1000, 2))
    pts2 = rng.uniform(-0.5, 0.5, size=(1000, 2))

    def aligned_gap(ge_a, ge_b):
        r1 = es.residual(ge_a, pts1, pts2)
        r2 = es.residual(ge_b, pts1, pts2)
        scale = (r1 @ r2) / (r1 @ r1)
        return np.abs(scale * r1 - r2).max()

    worst = 0.0
    for lm, um in ((CameraModel.LINEAR_PB, CameraModel.UNIFORM_PB),
                   (CameraModel.LINEAR_RS, CameraModel.UNIFORM_RS)):
        p = _draw(lm, (6, LIFTED_MODELS.index(lm)), 0.05, 0.0)
        worst = max(worst, aligned_gap(es.build(p), es.build(p.with_model(um))))
    # zero linear velocity: the 5x5 form collapses to the 3x3 constraint
    p0 = _draw(CameraModel.PERSPECTIVE, (6, 7), 0.0, 0.0)
    worst = max(worst, aligned_gap(
        es.build(p0), es.build(p0.with_model(CameraModel.LINEAR_RS))))
    ok = worst <= 1e-12
    assert _report(7, "hierarchy_reductions", ok,
                   f"worst aligned residual gap {worst:.2e} on 1000 points")


def test_criterion_08_sampson_stationarity():
    worst_term = 0.0
    worst_move = 0.0
    for seed in range(5):
        rng = np.random.default_rng((8, seed))
        tr = generate(SceneConfig(model=CameraModel.LINEAR_RS, n_points=60), rng)
        x1, x2 = tr.correspondences
        ge = es.build(tr.params)
        worst_term = max(worst_term, float(nl.sampson_terms(ge, x1, x2).max()))
        res = nl.refine(tr.params, x1, x2)
        v0 = nl.params_to_vector(tr.params.gauge_fixed())
        v1 = nl.params_to_vector(res.params.gauge_fixed())
        worst_move = max(worst_move, float(np.linalg.norm(v1 - v0)))
    ok = worst_term <= 1e-18 and worst_move <= 1e-10
    assert _report(8, "sampson_stationarity", ok,
                   f"max per-point term {worst_term:.2e}, "
                   f"max parameter move {worst_move:.2e}")


def test_criterion_09_ransac_planted_outliers():
    # 30% gross outliers on noise-free inliers: exact classification and
    # accurate parameters, deterministically per seed
    n_in, n_out = 140, 60
    trials = 200
    n_good = 0
    for seed in range(trials):
        rng = np.random.default_rng((9, seed))
        tr = generate(SceneConfig(model=CameraModel.LINEAR_RS,
                                  n_points=n_in), rng)
        x1, x2 = tr.correspondences
        ge = es.build(tr.params)
        out1, out2 = [], []
        while len(out1) < n_out:
            a = rng.uniform(-0.5, 0.5, size=2)
            b = rng.uniform(-0.5, 0.5, size=2)
            if nl.per_point_sampson(ge, a[None], b[None])[0] > 1e-2:
                out1.append(a)
                out2.append(b)
        x1 = np.vstack([x1, out1])
        x2 = np.vstack([x2, out2])
        mask = np.zeros(n_in + n_out, dtype=bool)
        mask[:n_in] = True
        try:
            # inliers are noise-free, so classify at a tight threshold
            res = robust.ransac(x1, x2, CameraModel.LINEAR_RS,
                                robust.RansacConfig(seed=seed, threshold=1e-9))
        except Exception:
            continue
        gt = tr.params.gauge_fixed()
        p = res.params.gauge_fixed()
        n_good += (np.array_equal(res.inliers, mask)
                   and error_rotation(p.R, gt.R) <= 1e-4
                   and error_translation(p.t, gt.t) <= 1e-4
                   and np.abs(np.concatenate([p.d1 - gt.d1,
                                              p.d2 - gt.d2])).max() <= 1e-4)
    # determinism under a fixed seed
    rng = np.random.default_rng((9, 0))
    tr = generate(SceneConfig(model=CameraModel.LINEAR_RS, n_points=n_in), rng)
    x1, x2 = tr.correspondences
    a = robust.ransac(x1, x2, CameraModel.LINEAR_RS, robust.RansacConfig(seed=0))
    b = robust.ransac(x1, x2, CameraModel.LINEAR_RS, robust.RansacConfig(seed=0))
    det = (np.array_equal(a.inliers, b.inliers)
           and np.array_equal(a.params.R, b.params.R)
           and np.array_equal(a.params.t, b.params.t))
    ok = n_good >= 0.99 * trials and det
    assert _report(9, "ransac_planted_outliers", ok,
                   f"{n_good}/{trials} trials good, deterministic={det}")


def _implicit_fit_rms(points, degree):
    """RMS residual of the best algebraic curve of the given total degree."""
    u, v = points[:, 0], points[:, 1]
    cols = [u ** a * v ** b
            for a in range(degree + 1) for b in range(degree + 1 - a)]
    A = np.stack(cols, axis=-1)
    _, s, Vt = np.linalg.svd(A, full_matrices=False)
    return float(np.linalg.norm(A @ Vt[-1]) / np.sqrt(len(points)))


def test_criterion_10_curve_degrees():
    bounds = (-0.5, 0.5, -5.0, 5.0)
    point = (0.1, -0.05)
    detail = []
    ok = True
    for model in LIFTED_MODELS:
        p = _draw(model, (10, LIFTED_MODELS.index(model)), 0.1, 0.1)
        curve = es.sample_epipolar_curve(es.build(p), point, bounds, 200)
        assert len(curve.points) >= 50
        conic = _implicit_fit_rms(curve.points, 2)
        if model in (CameraModel.LINEAR_PB, CameraModel.LINEAR_RS):
            ok &= conic <= 1e-8
            detail.append(f"{model.value} conic {conic:.1e}")
        else:
            cubic = _implicit_fit_rms(curve.points, 3)
            ok &= cubic <= 1e-8 and conic > 1e-8 and conic > cubic
            detail.append(f"{model.value} cubic {cubic:.1e} conic {conic:.1e}")
    assert _report(10, "curve_degrees", ok, "; ".join(detail))
