"""Readers and writers for every file the CLI emits.

Trajectory CSV
    Header row ``t,x_1_1,y_1_1,...,x_N_m,y_N_m,<invariant names>``, then one
    row per sample. Floats use ``repr`` precision so files round-trip exactly.

Records (JSONL)
    One JSON object per line, each with a ``"kind"`` tag (``mle``,
    ``mle_series``, ``crossing``, ``bracket_table``, ...).

Grid CSV
    First line ``# nx=<nx> ny=<ny> time=<t>``, then ``nx`` rows of ``ny``
    values (row ``i`` is ``x_i``).

Grid binary
    Little-endian: magic ``b"SVGRID01"``, int32 ``nx``, int32 ``ny``,
    float64 ``time``, then ``nx*ny`` float64 values row-major.
"""
from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

GRID_MAGIC = b"SVGRID01"
_GRID_HEADER = struct.Struct("<8siid")


def _fmt(x):
    return repr(float(x))


def trajectory_columns(m, n, invariant_names):
    cols = ["t"]
    for j in range(1, n + 1):
        for a in range(1, m + 1):
            cols += [f"x_{j}_{a}", f"y_{j}_{a}"]
    return cols + list(invariant_names)


def write_trajectory_csv(path, record):
    n = record.strengths.size
    cols = trajectory_columns(record.m, n, record.invariant_names)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for t, z, inv in zip(record.times, record.states, record.invariant_series):
            w.writerow([_fmt(t)] + [_fmt(v) for v in z] + [_fmt(v) for v in inv])
    return cols


def read_trajectory_csv(path):
    """Return (column names, float array of shape (rows, columns))."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    cols = rows[0]
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, len(cols))
    return cols, data


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_records(path, records):
    with open(path, "w") as fh:
        for rec in records:
            if "kind" not in rec:
                raise ValueError("every record needs a 'kind' tag")
            fh.write(json.dumps(_jsonable(rec), sort_keys=True) + "\n")


def read_records(path):
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_grid_csv(path, values, time=0.0):
    values = np.asarray(values, dtype=float)
    nx, ny = values.shape
    with open(path, "w") as fh:
        fh.write(f"# nx={nx} ny={ny} time={_fmt(time)}\n")
        for row in values:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_grid_csv(path):
    """Return (values, time)."""
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise ValueError(f"{path}: missing grid header")
        meta = dict(item.split("=") for item in header[1:].split())
        nx, ny, time = int(meta["nx"]), int(meta["ny"]), float(meta["time"])
        values = np.array([[float(v) for v in line.split(",")] for line in fh if line.strip()])
    if values.shape != (nx, ny):
        raise ValueError(f"{path}: header says {nx}x{ny}, found {values.shape}")
    return values, time


def write_grid_binary(path, values, time=0.0):
    values = np.ascontiguousarray(values, dtype="<f8")
    nx, ny = values.shape
    with open(path, "wb") as fh:
        fh.write(_GRID_HEADER.pack(GRID_MAGIC, nx, ny, float(time)))
        fh.write(values.tobytes())


def read_grid_binary(path):
    raw = Path(path).read_bytes()
    magic, nx, ny, time = _GRID_HEADER.unpack_from(raw)
    if magic != GRID_MAGIC:
        raise ValueError(f"{path}: not a grid file")
    values = np.frombuffer(raw, dtype="<f8", offset=_GRID_HEADER.size)
    if values.size != nx * ny:
        raise ValueError(f"{path}: expected {nx * ny} values, found {values.size}")
    return values.reshape(nx, ny).copy(), time


def read_grid(path):
    with open(path, "rb") as fh:
        head = fh.read(len(GRID_MAGIC))
    if head == GRID_MAGIC:
        return read_grid_binary(path)
    return read_grid_csv(path)


def write_manifest(path, manifest):
    Path(path).write_text(json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n")


def read_manifest(path):
    return json.loads(Path(path).read_text())
