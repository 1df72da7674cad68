"""File formats: correspondence files, params JSON, schema validation.

Correspondence files carry pixel coordinates plus intrinsics; the loader
is the single place where pixels are converted to the normalized
coordinates every solver works in.
"""

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .models import CameraModel, MotionParams

FORMAT_VERSION = 1


@dataclass(frozen=True)
class Intrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")

    def normalize(self, pts_px):
        pts_px = np.atleast_2d(np.asarray(pts_px, dtype=float))
        return np.stack([(pts_px[:, 0] - self.cx) / self.fx,
                         (pts_px[:, 1] - self.cy) / self.fy], axis=-1)

    def denormalize(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.stack([pts[:, 0] * self.fx + self.cx,
                         pts[:, 1] * self.fy + self.cy], axis=-1)


@dataclass(frozen=True)
class CorrespondenceFile:
    """Pixel-coordinate correspondences with the intrinsics to undo them."""
    model: CameraModel
    intrinsics: Intrinsics
    image_size: tuple
    pixels: np.ndarray          # (n, 4) rows u1 v1 u2 v2

    def __post_init__(self):
        if len(self.pixels) < 1:
            raise ValueError("need at least one correspondence")
        if self.pixels.shape[1] != 4:
            raise ValueError("rows must be u1 v1 u2 v2")

    def normalized(self):
        """(x1, x2) arrays of normalized (u, v) coordinates."""
        K = self.intrinsics
        return K.normalize(self.pixels[:, 0:2]), K.normalize(self.pixels[:, 2:4])


def save_correspondences(cf: CorrespondenceFile, path):
    K = cf.intrinsics
    with open(path, "w") as fh:
        fh.write(f"# rspose-corrs v{FORMAT_VERSION}\n")
        fh.write(f"# model {cf.model.value}\n")
        fh.write(f"# intrinsics {K.fx:.17g} {K.fy:.17g} {K.cx:.17g} {K.cy:.17g}\n")
        fh.write(f"# image_size {cf.image_size[0]} {cf.image_size[1]}\n")
        for row in cf.pixels:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def load_correspondences(path) -> CorrespondenceFile:
    model = None
    intr = None
    size = None
    rows = []
    with open(path) as fh:
        first = fh.readline().strip()
        if first != f"# rspose-corrs v{FORMAT_VERSION}":
            raise ValueError(f"unrecognized header {first!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if parts[0] == "model":
                    model = CameraModel(parts[1])
                elif parts[0] == "intrinsics":
                    intr = Intrinsics(*map(float, parts[1:5]))
                elif parts[0] == "image_size":
                    size = (int(parts[1]), int(parts[2]))
                continue
            vals = [float(v) for v in line.split()]
            if len(vals) != 4:
                raise ValueError(f"bad correspondence row {line!r}")
            rows.append(vals)
    if model is None or intr is None or size is None:
        raise ValueError("missing model / intrinsics / image_size header lines")
    return CorrespondenceFile(model, intr, size, np.array(rows))


# ---------------------------------------------------------------------------
# params JSON

def params_to_dict(params: MotionParams):
    out = {
        "model": params.model.value,
        "R": params.R.tolist(),
        "t": params.t.tolist(),
    }
    if params.model is not CameraModel.PERSPECTIVE:
        out["d1"] = params.d1.tolist()
        out["d2"] = params.d2.tolist()
        out["w1"] = params.w1.tolist()
        out["w2"] = params.w2.tolist()
    return out


def params_from_dict(d) -> MotionParams:
    model = CameraModel(d["model"])
    kw = {}
    for key in ("w1", "w2", "d1", "d2"):
        if key in d:
            kw[key] = np.asarray(d[key], dtype=float)
    if model is CameraModel.PERSPECTIVE:
        kw = {}
    elif model in (CameraModel.LINEAR_RS, CameraModel.LINEAR_PB):
        kw.pop("w1", None)
        kw.pop("w2", None)
    return MotionParams(model, np.asarray(d["R"], dtype=float),
                        np.asarray(d["t"], dtype=float), **kw)


def _load_schema(name):
    with resources.files("rspose.schemas").joinpath(name).open() as fh:
        return json.load(fh)


def validate_params_json(doc):
    """Validate a solve-output document against the shipped schema."""
    import jsonschema
    jsonschema.validate(doc, _load_schema("solve_output.json"))


def save_params_json(path, params, extras=None, validate=True):
    doc = {"params": params_to_dict(params)}
    if extras:
        doc.update(extras)
    if validate:
        validate_params_json(doc)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_params_json(path):
    with open(path) as fh:
        doc = json.load(fh)
    return params_from_dict(doc["params"]), doc
