"""Reproducible CSV output: a digest comment line, a header row, then rows
with every float in 17-significant-digit lowercase scientific notation."""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np


def config_digest(config) -> str:
    blob = json.dumps(config, sort_keys=True, default=_jsonable, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"not serializable: {type(obj).__name__}")


def format_value(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".16e")


def csv_text(header, rows, config) -> str:
    lines = [f"# config-sha256: {config_digest(config)}", ",".join(header)]
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(path, header, rows, config):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(csv_text(header, rows, config))
    return path


def read_csv(path):
    """Return (digest, header, float array) from a file written by write_csv."""
    lines = Path(path).read_text().splitlines()
    digest = lines[0].split(":", 1)[1].strip()
    header = lines[1].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:]])
    return digest, header, data.reshape(-1, len(header))
