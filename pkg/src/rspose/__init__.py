"""Two-view relative pose for rolling-shutter and push-broom cameras.

Generalized essential matrices (4x4 to 7x7), linear N-point solvers,
atomic-matrix recovery, Sampson-error refinement, RANSAC, and a synthetic
benchmark harness.
"""

from .errors import (CheiralityAmbiguous, ConvergenceFailed,
                     DegenerateConfiguration, FrustumExhausted,
                     InsufficientPoints, NearZeroVelocity, NoConsensus,
                     NonFiniteObjective, NoRealSolution, RsposeError,
                     ZeroVector)
from .models import (CameraModel, LIFT_DIM, LINEAR_POINTS, MINIMAL_POINTS,
                     MotionParams, lift)
from .geometry import (pairwise_essential, rotation_exact, rotation_log,
                       rotation_small, scanline_pose, skew, unskew)
from .essential import (GeneralizedEssential, build, residual,
                        sample_epipolar_curve, correspondences_on_variety)
from .linear import (gs_eight_point, recover_atoms, solve_20pt, solve_linear)
from .nonlinear import (SampsonConfig, minimal_solve, refine, sampson_error)
from .robust import RansacConfig, RansacResult, ransac
from .synth import (ExperimentReport, SceneConfig, error_rotation,
                    error_translation, generate, run_sweep, vec_angle)
from .io import (CorrespondenceFile, Intrinsics, load_correspondences,
                 load_params_json, save_correspondences, save_params_json)

__version__ = "0.1.0"

__all__ = [
    "CameraModel", "MotionParams", "lift", "LIFT_DIM", "LINEAR_POINTS",
    "MINIMAL_POINTS",
    "GeneralizedEssential", "build", "residual", "sample_epipolar_curve",
    "correspondences_on_variety",
    "skew", "unskew", "rotation_exact", "rotation_small", "rotation_log",
    "scanline_pose", "pairwise_essential",
    "solve_linear", "solve_20pt", "recover_atoms", "gs_eight_point",
    "SampsonConfig", "refine", "minimal_solve", "sampson_error",
    "RansacConfig", "RansacResult", "ransac",
    "SceneConfig", "generate", "run_sweep", "ExperimentReport",
    "error_rotation", "error_translation", "vec_angle",
    "CorrespondenceFile", "Intrinsics", "load_correspondences",
    "save_correspondences", "load_params_json", "save_params_json",
    "RsposeError", "InsufficientPoints", "DegenerateConfiguration",
    "NoRealSolution", "NearZeroVelocity", "CheiralityAmbiguous",
    "NoConsensus", "ConvergenceFailed", "NonFiniteObjective",
    "FrustumExhausted", "ZeroVector",
]
