"""Reading and writing point sets, lattices and reports.

Floats are written with 17 significant digits so that every file
round-trips bit for bit.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .errors import ArgumentError
from .pointsets import WeightedPointSet


def fmt(x: float) -> str:
    return "%.17g" % x


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def _encode(obj, indent, level):
    pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
    end = "" if indent is None else "\n" + " " * (indent * level)
    sep = "," if indent is None else ","
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return json.dumps(None)
        return fmt(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (list, dict)) for v in obj):
            return "[" + ", ".join(_encode(v, None, 0) for v in obj) + "]"
        return "[" + sep.join(pad + _encode(v, indent, level + 1) for v in obj) + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = (pad + json.dumps(k) + ": " + _encode(v, indent, level + 1) for k, v in obj.items())
        return "{" + sep.join(items) + end + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with 17-significant-digit floats and stable key order."""
    return _encode(_plain(obj), indent, 0) + "\n"


def config_hash(config: dict) -> str:
    """Short SHA-256 of a canonical rendering of ``config``."""
    text = json.dumps(_plain(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def lattice_to_json(lat) -> str:
    return dumps(lat.to_dict())


def write_pointset(ps: WeightedPointSet, path) -> tuple:
    """Write ``path`` (CSV) and ``path.json`` (meta sidecar)."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write(pointset_csv(ps))
    side = path.with_name(path.name + ".json")
    side.write_text(dumps({"m": ps.m, "d": ps.d, "weight_mass": ps.weight_mass, "meta": ps.meta}))
    return path, side


def pointset_csv(ps: WeightedPointSet) -> str:
    head = ",".join([f"x{j + 1}" for j in range(ps.d)] + ["weight"])
    rows = [",".join(fmt(v) for v in (*p, w)) for p, w in zip(ps.points, ps.weights)]
    return "\n".join([head, *rows]) + "\n"


def read_pointset(path) -> WeightedPointSet:
    """Parse a point set CSV; the sidecar, when present, supplies ``meta``."""
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ArgumentError(f"cannot open {path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[-1].strip() != "weight" or len(header) < 2:
            raise ArgumentError(f"{path}:1: header must be x1,...,xd,weight")
        d = len(header) - 1
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != d + 1:
                raise ArgumentError(f"{path}:{lineno}: expected {d + 1} fields, got {len(row)}")
            try:
                vals = [float(c) for c in row]
            except ValueError:
                raise ArgumentError(f"{path}:{lineno}: non-numeric field") from None
            if not all(math.isfinite(v) for v in vals):
                raise ArgumentError(f"{path}:{lineno}: non-finite value")
            if any(not 0 <= v < 1 for v in vals[:d]):
                raise ArgumentError(f"{path}:{lineno}: coordinate outside [0, 1)")
            rows.append(vals)
    if not rows:
        raise ArgumentError(f"{path}: no points")
    arr = np.array(rows)
    meta = {}
    side = path.with_name(path.name + ".json")
    if side.exists():
        try:
            meta = json.loads(side.read_text()).get("meta", {})
        except json.JSONDecodeError as exc:
            raise ArgumentError(f"{side}:{exc.lineno}: malformed sidecar") from None
    return WeightedPointSet(arr[:, :d], arr[:, d], meta)


def read_config(path) -> dict:
    """``key=value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ArgumentError(f"cannot open {path}: {exc.strerror}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ArgumentError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ArgumentError(f"{path}:{lineno}: empty key")
        out[key] = value
    return out


def table_csv(header, rows) -> str:
    def cell(v):
        if isinstance(v, float):
            return fmt(v)
        return str(v)

    return "\n".join([",".join(header), *(",".join(cell(v) for v in row) for row in rows)]) + "\n"
