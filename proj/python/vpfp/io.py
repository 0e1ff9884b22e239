"""Readers for run directories: diagnostics.csv, manifest.json and snapshots."""

import csv
import json
from pathlib import Path

import numpy as np

from ._vpfp import csv_columns, read_snapshot_binary


def read_diagnostics(path):
    """Diagnostics CSV as a dict of column name -> float array."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = rows[0]
    missing = [c for c in csv_columns() if c not in header]
    if missing:
        raise KeyError(f"{path}: missing columns {missing}")
    data = np.array([[float(x) for x in r] for r in rows[1:]], dtype=float).reshape(-1, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def read_manifest(path):
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.json"
    with path.open() as fh:
        return json.load(fh)


def read_snapshot(path):
    """Returns (x, v, f) for a CSV snapshot, or (None, None, f) for a binary one.

    f has shape (N_x, N_v).
    """
    path = Path(path)
    if path.suffix == ".bin":
        return None, None, read_snapshot_binary(path)
    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    x = np.unique(table[:, 0])
    v = np.unique(table[:, 1])
    if x.size * v.size != table.shape[0]:
        raise ValueError(f"{path}: not a full (x, v) grid")
    return x, v, table[:, 2].reshape(x.size, v.size)


def read_run(run_dir):
    """Manifest plus diagnostics for one run directory."""
    run_dir = Path(run_dir)
    manifest = read_manifest(run_dir)
    files = manifest.get("diagnostics", ["diagnostics.csv"])
    if isinstance(files, str):
        files = [files]
    return manifest, {Path(f).stem: read_diagnostics(run_dir / f) for f in files}
