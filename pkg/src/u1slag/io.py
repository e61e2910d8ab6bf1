"""Serialization: grid fields as CSV, reports as JSON, lifted meshes as OBJ and CSV."""

import csv
import json
import math
from pathlib import Path

import numpy as np

FMT = "%.17g"


def _num(x):
    return FMT % float(x)


def write_field_csv(path, grid, values):
    """Rows ``x, y, value`` for every grid slot, interior nodes first."""
    values = np.asarray(getattr(values, "values", values), dtype=float)
    pts = grid.points
    if len(values) != len(pts):
        raise ValueError("field length does not match the grid")
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write("x,y,value\n")
        for (x, y), val in zip(pts, values):
            fh.write(f"{_num(x)},{_num(y)},{_num(val)}\n")
    return path


def read_field_csv(path):
    """Inverse of :func:`write_field_csv`: ``(x, y, value)`` arrays."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if rows[0] != ["x", "y", "value"]:
        raise ValueError(f"{path}: unexpected header {rows[0]}")
    data = np.array([[float(t) for t in r] for r in rows[1:]]).reshape(-1, 3)
    return data[:, 0], data[:, 1], data[:, 2]


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_jsonable(obj.real), to_jsonable(obj.imag)]
    if hasattr(obj, "as_dict"):
        return to_jsonable(obj.as_dict())
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def dumps(obj):
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj):
    path = Path(path)
    path.write_text(dumps(obj))
    return path


PROJECTIONS = {
    "z1-z3": lambda p: (p[..., 0].real, p[..., 0].imag, p[..., 2].real),
    "re": lambda p: (p[..., 0].real, p[..., 1].real, p[..., 2].real),
    "im": lambda p: (p[..., 0].imag, p[..., 1].imag, p[..., 2].imag),
    "z2-z3": lambda p: (p[..., 1].real, p[..., 1].imag, p[..., 2].real),
}


def write_obj(path, patch, projection="z1-z3"):
    """OBJ surface: one quad sheet over the first two patch axes per sample of the third.

    Vertices are a real projection of C^3, ``(Re z1, Im z1, Re z3)`` by
    default; ``projection`` is a key of :data:`PROJECTIONS` or a callable on
    the ``(..., 3)`` complex point array.
    """
    if isinstance(projection, str):
        if projection not in PROJECTIONS:
            raise ValueError(f"unknown projection {projection!r}; choose from {sorted(PROJECTIONS)}")
        projection = PROJECTIONS[projection]
    proj = projection
    P = patch.points
    valid = patch.valid
    X, Y, Z = proj(P)
    n0, n1, n2 = patch.shape
    index = -np.ones((n0, n1, n2), dtype=int)
    index[valid] = np.arange(int(valid.sum())) + 1
    lines = [f"# {int(valid.sum())} vertices"]
    order = np.argwhere(valid)
    for i, j, k in order:
        lines.append(f"v {_num(X[i, j, k])} {_num(Y[i, j, k])} {_num(Z[i, j, k])}")
    quad = valid[:-1, :-1] & valid[1:, :-1] & valid[1:, 1:] & valid[:-1, 1:]
    for i, j, k in np.argwhere(quad):
        a, b = index[i, j, k], index[i + 1, j, k]
        c, d = index[i + 1, j + 1, k], index[i, j + 1, k]
        lines.append(f"f {a} {b} {c} {d}")
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


PATCH_COLUMNS = ("re_z1", "im_z1", "re_z2", "im_z2", "re_z3", "im_z3")


def write_patch_csv(path, patch):
    """All six real coordinates of every valid patch sample."""
    pts = patch.flat()
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(",".join(PATCH_COLUMNS) + "\n")
        for z1, z2, z3 in pts:
            fh.write(",".join(_num(t) for t in (z1.real, z1.imag, z2.real, z2.imag, z3.real, z3.imag)) + "\n")
    return path


def read_patch_csv(path):
    raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return raw[:, 0::2] + 1j * raw[:, 1::2]
