"""Command-line front-end: synth, solve, sweep, curves, audit.

Exit codes: 0 success, 1 usage or I/O error, 2 insufficient points,
3 degenerate configuration, 4 no RANSAC consensus, 5 other solver failure.
Machine-readable error JSON goes to stderr.
"""

import argparse
import json
import sys

import numpy as np

from . import essential as es
from . import io as rio
from . import linear as lin
from . import nonlinear as nl
from . import robust
from . import synth
from .errors import (DegenerateConfiguration, InsufficientPoints, NoConsensus,
                     RsposeError)
from .models import CameraModel, LINEAR_POINTS, MotionParams

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INSUFFICIENT = 2
EXIT_DEGENERATE = 3
EXIT_NO_CONSENSUS = 4
EXIT_SOLVER = 5


def _fail(code, exc_or_msg):
    if isinstance(exc_or_msg, BaseException):
        doc = {"error": type(exc_or_msg).__name__, "message": str(exc_or_msg)}
    else:
        doc = {"error": "UsageError", "message": str(exc_or_msg)}
    print(json.dumps(doc), file=sys.stderr)
    return code


def _error_code(exc):
    if isinstance(exc, InsufficientPoints):
        return EXIT_INSUFFICIENT
    if isinstance(exc, DegenerateConfiguration):
        return EXIT_DEGENERATE
    if isinstance(exc, NoConsensus):
        return EXIT_NO_CONSENSUS
    return EXIT_SOLVER


def _model_arg(p):
    p.add_argument("--model", choices=[m.value for m in CameraModel],
                   default=CameraModel.LINEAR_RS.value)


def cmd_synth(args):
    cfg = synth.SceneConfig(
        model=CameraModel(args.model), focal=args.focal,
        image_size=(args.width, args.height), n_points=args.n_points,
        noise=args.noise, d_scale=args.d_scale, w_scale=args.w_scale,
        seed=args.seed)
    trial = synth.generate(cfg)
    x1, x2 = trial.correspondences
    K = rio.Intrinsics(cfg.focal, cfg.focal,
                       0.5 * cfg.image_size[0], 0.5 * cfg.image_size[1])
    px = np.hstack([K.denormalize(x1), K.denormalize(x2)])
    cf = rio.CorrespondenceFile(cfg.model, K, cfg.image_size, px)
    rio.save_correspondences(cf, args.output)
    if args.gt_output:
        rio.save_params_json(args.gt_output, trial.params)
    print(f"synth: model={cfg.model.value} points={len(px)} seed={cfg.seed} "
          f"-> {args.output}")
    return EXIT_OK


def _solve_chain(x1, x2, model, args):
    """Run the requested solver chain; returns (params, extras)."""
    n = len(x1)
    extras = {"n_points": n, "algorithm": args.chain}
    if args.chain == "linear":
        if model is CameraModel.PERSPECTIVE:
            params, _ = lin.gs_eight_point(x1, x2)
        elif model is CameraModel.LINEAR_RS:
            params = lin.solve_20pt(x1, x2)
        else:
            raise InsufficientPoints(
                f"no linear motion recovery for {model.value}; use --chain minimal")
    elif args.chain == "minimal":
        params = nl.minimal_solve(x1, x2, model, seed=args.seed).params
    elif args.chain == "ransac":
        rcfg = robust.RansacConfig(threshold=args.threshold, seed=args.seed)
        res = robust.ransac(x1, x2, model, rcfg)
        params = res.params
        extras["inliers"] = [bool(b) for b in res.inliers]
        extras["iterations"] = res.iterations
        extras["sampson_error"] = res.sampson_error
    else:
        raise ValueError(f"unknown chain {args.chain!r}")
    if args.refine and args.chain != "ransac":
        if params.model is not model:
            params = params.with_model(model)
        params = nl.refine(params, x1, x2).params
        extras["algorithm"] += "+refine"
    ge = es.build(params)
    err = nl.sampson_error(ge, x1, x2)
    extras["sampson_error"] = float(err)
    extras["mean_sampson"] = float(err / max(n, 1))
    return params, extras


def cmd_solve(args):
    cf = rio.load_correspondences(args.input)
    model = CameraModel(args.model) if args.model else cf.model
    x1, x2 = cf.normalized()
    print(f"solve: model={model.value} points={len(x1)} chain={args.chain}")
    params, extras = _solve_chain(x1, x2, model, args)
    rio.save_params_json(args.output, params, extras)
    print(f"solve: wrote {args.output} "
          f"(sampson={extras['sampson_error']:.3e})")
    return EXIT_OK


def cmd_sweep(args):
    cfg = synth.SceneConfig(
        model=CameraModel(args.model), n_points=args.n_points,
        noise=args.noise, d_scale=args.d_scale, w_scale=args.w_scale,
        trials=args.trials, seed=args.seed)
    grid = [float(v) for v in args.grid.split(",")]
    solvers = tuple(args.solvers.split(","))
    for s in solvers:
        if s not in synth._SOLVERS:
            raise ValueError(f"unknown solver {s!r}")
    report = synth.run_sweep(args.kind, grid, cfg, solvers)
    report.to_csv(args.csv)
    if args.json:
        report.to_json(args.json)
    print(f"sweep: kind={args.kind} grid={grid} trials={cfg.trials} "
          f"-> {args.csv}")
    return EXIT_OK


def cmd_curves(args):
    if args.params:
        params, _ = rio.load_params_json(args.params)
        ge = es.build(params)
    else:
        with open(args.matrix) as fh:
            doc = json.load(fh)
        ge = es.GeneralizedEssential(CameraModel(doc["model"]),
                                     np.asarray(doc["F"], dtype=float))
    pts = np.loadtxt(args.points, ndmin=2)
    bounds = tuple(float(v) for v in args.bounds.split(","))
    if len(bounds) != 4:
        raise ValueError("bounds must be umin,umax,vmin,vmax")
    curves = [es.sample_epipolar_curve(ge, p, bounds, args.n_samples)
              for p in pts]
    es.curves_to_csv(curves, args.output)
    n_empty = sum(1 for c in curves if len(c.points) == 0)
    if n_empty:
        print(f"warning: {n_empty}/{len(curves)} curves have no samples "
              "inside bounds", file=sys.stderr)
    print(f"curves: model={ge.model.value} degree={curves[0].degree} "
          f"curves={len(curves)} -> {args.output}")
    return EXIT_OK


def cmd_audit(args):
    """Check a correspondence file against ground-truth params."""
    cf = rio.load_correspondences(args.input)
    params, _ = rio.load_params_json(args.params)
    x1, x2 = cf.normalized()
    ge = es.build(params)
    res = np.abs(es.residual(ge, x1, x2))
    n_ok = int((res <= args.tol).sum())
    print(f"audit: {n_ok}/{len(x1)} correspondences within {args.tol:g} "
          f"(max residual {res.max():.3e})")
    return EXIT_OK if n_ok == len(x1) else EXIT_SOLVER


def build_parser():
    ap = argparse.ArgumentParser(
        prog="rspose",
        description="Two-view relative pose for rolling-shutter and "
                    "push-broom cameras.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic correspondence file")
    _model_arg(p)
    p.add_argument("--focal", type=float, default=640.0)
    p.add_argument("--width", type=int, default=640)
    p.add_argument("--height", type=int, default=480)
    p.add_argument("--n-points", type=int, default=100)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--d-scale", type=float, default=1e-3)
    p.add_argument("--w-scale", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.add_argument("--gt-output", default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("solve", help="solve relative pose from a file")
    p.add_argument("--input", required=True)
    p.add_argument("--model", choices=[m.value for m in CameraModel],
                   default=None, help="override the file's model hint")
    p.add_argument("--chain", choices=["linear", "minimal", "ransac"],
                   default="linear")
    p.add_argument("--refine", action="store_true")
    p.add_argument("--threshold", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="run a sweep experiment")
    p.add_argument("--kind", choices=["noise", "focal", "velocity"],
                   required=True)
    p.add_argument("--grid", required=True, help="comma-separated values")
    _model_arg(p)
    p.add_argument("--n-points", type=int, default=100)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--d-scale", type=float, default=1e-3)
    p.add_argument("--w-scale", type=float, default=1e-4)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--solvers", default="gs,rs_refine")
    p.add_argument("--csv", required=True)
    p.add_argument("--json", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("curves", help="sample epipolar curves")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--params", help="params JSON (from solve/synth)")
    g.add_argument("--matrix", help="JSON with model and F entries")
    p.add_argument("--points", required=True,
                   help="text file of normalized u v rows")
    p.add_argument("--bounds", default="-0.5,0.5,-0.375,0.375")
    p.add_argument("--n-samples", type=int, default=200)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("audit", help="check correspondences against params")
    p.add_argument("--input", required=True)
    p.add_argument("--params", required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_audit)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except RsposeError as exc:
        return _fail(_error_code(exc), exc)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        return _fail(EXIT_USAGE, exc)


if __name__ == "__main__":
    sys.exit(main())
