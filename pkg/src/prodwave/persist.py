"""CSV and JSON persistence for output paths, tables and run manifests."""
from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .propagate import OutputPath


def _plain(obj):
    """Convert numpy scalars/arrays and complex numbers into JSON-friendly values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, complex):
        return {"real": obj.real, "imag": obj.imag}
    return obj


def dump_json(obj, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n")
    return path


def canonical_hash(obj) -> str:
    """SHA-256 of the sorted, compact JSON form of ``obj``."""
    text = json.dumps(_plain(obj), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def write_rows(rows, path, fieldnames=None) -> Path:
    """Write a list of flat dicts as CSV; floats use ``repr`` so values round-trip exactly."""
    rows = list(rows)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fieldnames is None:
        fieldnames = []
        for r in rows:
            for k in r:
                if k not in fieldnames:
                    fieldnames.append(k)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _cell(r.get(k, "")) for k in fieldnames})
    return path


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (dict, list, tuple)):
        return json.dumps(_plain(v), sort_keys=True)
    return v


def read_rows(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def write_path(path_obj: OutputPath, path) -> Path:
    """Write ``t,y`` CSV plus a ``.json`` sidecar with kind, params, seed and network hash."""
    path = Path(path)
    write_rows(({"t": t, "y": float(v)} for t, v in enumerate(path_obj.y)), path, ["t", "y"])
    meta = {"kind": path_obj.kind, "params": path_obj.params, "seed": path_obj.seed,
            "network_hash": path_obj.network_hash, "length": len(path_obj.y)}
    dump_json(meta, path.with_name(path.name + ".json"))
    return path


def read_path(path) -> OutputPath:
    path = Path(path)
    rows = read_rows(path)
    y = np.array([float(r["y"]) for r in rows])
    side = path.with_name(path.name + ".json")
    meta = json.loads(side.read_text()) if side.exists() else {}
    return OutputPath(y, meta.get("kind", "unknown"), meta.get("params", {}), meta.get("seed"),
                      meta.get("network_hash"))
