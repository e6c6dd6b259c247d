"""Dataset access: manifests, binary field files, quadrant initial data.

The harness talks to the solver package only through its documented file
formats, so the readers here are independent implementations of those
formats: the f64grid binary layout (32-byte header "WDSF" + version, nx,
ny, component count as little-endian uint32, then row-major float64
planes) and the JSON dataset manifest.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass

import numpy as np

_HEADER = struct.Struct("<4sIIII12x")
_MAGIC = b"WDSF"


def read_field(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic, version, nx, ny, ncomp = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != _MAGIC or version != 1:
            raise ValueError(f"{path}: not a v1 f64grid file")
        raw = fh.read(8 * ncomp * nx * ny)
    if len(raw) != 8 * ncomp * nx * ny:
        raise ValueError(f"{path}: truncated payload")
    return np.frombuffer(raw, dtype="<f8").reshape(ncomp, nx, ny).copy()


def read_json(path):
    with open(path, "r", encoding="ascii") as fh:
        return json.load(fh)


@dataclass(frozen=True)
class QuadrantProblem:
    """One dataset entry: quadrant states plus its stored fine trajectory."""

    quadrants: np.ndarray        # (4, 4) rows: quadrant 1..4, cols rho,u,v,p
    gamma: float
    t_final: float
    config_tag: int
    snapshot_times: tuple
    snapshot_paths: tuple
    fine_grid: tuple

    def nearest_snapshot_at_or_before(self, target: float):
        best = None
        for i, t in enumerate(self.snapshot_times):
            if t <= target + 1e-14:
                best = i
        if best is None:
            raise KeyError(f"no stored snapshot at or before t={target}")
        return self.snapshot_times[best], self.snapshot_paths[best]

    def load_snapshot(self, path) -> np.ndarray:
        """Conserved fine-grid state, shape (nx, ny, 4)."""
        return np.moveaxis(read_field(path), 0, -1)


def load_manifest(path):
    doc = read_json(path)
    base = os.path.dirname(os.path.abspath(path))
    problems = []
    for entry in doc["problems"]:
        spec = entry["spec"]
        pdir = os.path.join(base, entry["dir"])
        snaps = entry["snapshots"]
        problems.append(QuadrantProblem(
            quadrants=np.asarray(spec["quadrants"], dtype=np.float64),
            gamma=float(spec["gamma"]),
            t_final=float(spec["t_final"]),
            config_tag=int(spec.get("config_tag", 0)),
            snapshot_times=tuple(float(s["time"]) for s in snaps),
            snapshot_paths=tuple(os.path.join(pdir, s["file"]) for s in snaps),
            fine_grid=tuple(entry["fine_grid"]),
        ))
    return doc, problems


def quadrant_initial_state(quadrants, gamma: float, n: int) -> np.ndarray:
    """Conserved four-quadrant data on the left-aligned n x n node grid.

    Node (i, j) sits at (i/n, j/n); points on the 0.5 lines belong to the
    upper/right quadrants, matching the solver package.
    """
    x = np.arange(n) / n
    right = x >= 0.5
    idx = np.empty((n, n), dtype=np.intp)
    idx[np.ix_(right, right)] = 0
    idx[np.ix_(~right, right)] = 1
    idx[np.ix_(~right, ~right)] = 2
    idx[np.ix_(right, ~right)] = 3
    w = np.asarray(quadrants, dtype=np.float64)[idx]
    q = np.empty_like(w)
    q[..., 0] = w[..., 0]
    q[..., 1] = w[..., 0] * w[..., 1]
    q[..., 2] = w[..., 0] * w[..., 2]
    q[..., 3] = w[..., 3] / (gamma - 1.0) + 0.5 * w[..., 0] * (w[..., 1] ** 2 + w[..., 2] ** 2)
    return q


def restrict(fine: np.ndarray, n: int) -> np.ndarray:
    fx, fy = fine.shape[:2]
    if fx % n or fy % n:
        raise ValueError(f"fine grid {fx}x{fy} does not nest on {n}x{n}")
    return fine[::fx // n, ::fy // n]
