"""Family files (JSON/CSV) and schema-versioned report envelopes."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from . import numerics as nx
from .errors import ShapeError, SpecError
from .frames import FrameFamily
from .numerics import Tolerances

SCHEMA = "frame-iterates/1"


def family_to_dict(fam: FrameFamily) -> dict:
    return {
        "schema": SCHEMA,
        "label": fam.label,
        "ambient_dim": fam.ambient_dim,
        "k_min": fam.k_min,
        "k_max": fam.k_max,
        "periodic": fam.periodic,
        "reference_bounds": list(fam.reference_bounds) if fam.reference_bounds else None,
        "vectors": [[[float(z.real), float(z.imag)] for z in col] for col in fam.vectors.T],
    }


def family_from_dict(d: dict) -> FrameFamily:
    try:
        vecs = d["vectors"]
        k_min = int(d.get("k_min", 0))
        k_max = int(d.get("k_max", k_min + len(vecs) - 1))
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"malformed family JSON: {exc}") from None
    if not vecs:
        raise ShapeError("family JSON holds no vectors")
    cols = []
    for v in vecs:
        arr = np.asarray(v, dtype=float)
        if arr.ndim == 2 and arr.shape[1] == 2:
            cols.append(arr[:, 0] + 1j * arr[:, 1])
        elif arr.ndim == 1:
            cols.append(arr.astype(complex))
        else:
            raise ShapeError("each vector must be a list of [re, im] pairs or reals")
    if len({c.size for c in cols}) != 1:
        raise ShapeError("vectors differ in length")
    m = cols[0].size
    if "ambient_dim" in d and int(d["ambient_dim"]) != m:
        raise ShapeError(f"ambient_dim {d['ambient_dim']} but vectors have length {m}")
    rb = d.get("reference_bounds")
    return FrameFamily(np.column_stack(cols), k_min, k_max, label=str(d.get("label", "")),
                       periodic=bool(d.get("periodic", False)),
                       reference_bounds=tuple(rb) if rb else None)


def family_to_csv(fam: FrameFamily) -> str:
    """One vector per row, preceded by '#' metadata lines."""
    buf = io.StringIO()
    buf.write(f"# label={fam.label}\n# k_min={fam.k_min}\n# k_max={fam.k_max}\n")
    buf.write(f"# periodic={int(fam.periodic)}\n")
    if fam.reference_bounds:
        buf.write(f"# reference_bounds={fam.reference_bounds[0]!r},{fam.reference_bounds[1]!r}\n")
    buf.write(nx.matrix_to_csv(fam.vectors.T))
    return buf.getvalue()


def family_from_csv(text: str) -> FrameFamily:
    meta = {}
    for line in text.splitlines():
        if line.startswith("#") and "=" in line:
            key, val = line[1:].split("=", 1)
            meta[key.strip()] = val.strip()
    u = nx.matrix_from_csv(text).T
    try:
        k_min = int(meta.get("k_min", 0))
        k_max = int(meta.get("k_max", k_min + u.shape[1] - 1))
        rb = tuple(float(x) for x in meta["reference_bounds"].split(",")) if "reference_bounds" in meta else None
    except ValueError as exc:
        raise SpecError(f"malformed CSV metadata: {exc}") from None
    return FrameFamily(u, k_min, k_max, label=meta.get("label", ""),
                       periodic=meta.get("periodic", "0") in ("1", "true", "True"),
                       reference_bounds=rb)


def read_family(path) -> FrameFamily:
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".csv":
        return family_from_csv(text)
    try:
        return family_from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: not valid JSON ({exc})") from None


def write_family(fam: FrameFamily, path, fmt: str = "json"):
    text = family_to_csv(fam) if fmt == "csv" else dumps(family_to_dict(fam))
    atomic_write(path, text)


# ----- reports --------------------------------------------------------------

def sanitize(obj):
    """JSON-ready copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return sanitize(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(obj) -> str:
    return json.dumps(sanitize(obj), sort_keys=True, indent=2) + "\n"


def envelope(command: str, body: dict, tol: Tolerances, seed=None, **extra) -> dict:
    out = {"schema": SCHEMA, "command": command, "tolerances": tol.as_dict()}
    if seed is not None:
        out["seed"] = int(seed)
    out.update(extra)
    out.update(body)
    return out


def ladder_csv(ladder) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in ladder.csv_rows():
        w.writerow([repr(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def atomic_write(path, text: str):
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
