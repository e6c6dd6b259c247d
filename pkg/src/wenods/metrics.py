"""Error metrics, binary/CSV field formats, manifests and comparison tables."""

from __future__ import annotations

import json
import struct
import time

import numpy as np

from .errors import SchemaError, ShapeMismatch

MAGIC = b"WDSF"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIIII12x")
assert _HEADER.size == 32

VARIABLES = ("rho", "u", "v", "p")


def _check_shapes(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatch(f"field shapes differ: {a.shape} vs {b.shape}")
    return a, b


def l1_error(field, reference) -> float:
    """Mean absolute deviation over all nodes."""
    a, b = _check_shapes(field, reference)
    return float(np.mean(np.abs(a - b)))


def mse_loss(field, reference) -> float:
    """Mean squared deviation over all nodes."""
    a, b = _check_shapes(field, reference)
    d = a - b
    return float(np.mean(d * d))


def euler_l1(primitives, reference) -> float:
    """Sum of the four per-variable mean absolute errors.

    Both arguments hold primitive variables (rho, u, v, p) on the last axis.
    """
    a, b = _check_shapes(primitives, reference)
    if a.shape[-1] != 4:
        raise ShapeMismatch(f"expected 4 primitive components, got {a.shape[-1]}")
    return float(sum(l1_error(a[..., i], b[..., i]) for i in range(4)))


def rescale_validation(series):
    """Scale an error series by its maximum so the largest entry is 1."""
    series = np.asarray(series, dtype=np.float64)
    peak = np.max(series, axis=-1, keepdims=True)
    return series / peak


def pointwise_error(field, reference):
    a, b = _check_shapes(field, reference)
    return np.abs(a - b)


# --- binary field format ----------------------------------------------------
#
# 32-byte header: magic "WDSF", then uint32 version, nx, ny and component
# count (little endian, 12 pad bytes), followed by the components as
# consecutive row-major (nx, ny) planes of little-endian float64.

def write_field(path, field):
    """Write a (ncomp, nx, ny) or (nx, ny) array as an f64grid file."""
    arr = np.asarray(field, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3:
        raise ShapeMismatch(f"field must be 2- or 3-dimensional, got shape {arr.shape}")
    ncomp, nx, ny = arr.shape
    payload = np.ascontiguousarray(arr)
    if payload.dtype.byteorder == ">":
        payload = payload.astype("<f8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, nx, ny, ncomp))
        fh.write(payload.tobytes())


def read_field(path):
    """Read an f64grid file back into a (ncomp, nx, ny) array."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise SchemaError(f"{path}: truncated header")
        magic, version, nx, ny, ncomp = _HEADER.unpack(header)
        if magic != MAGIC:
            raise SchemaError(f"{path}: bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise SchemaError(f"{path}: unsupported version {version}")
        raw = fh.read(8 * ncomp * nx * ny)
    if len(raw) != 8 * ncomp * nx * ny:
        raise SchemaError(f"{path}: truncated payload")
    return np.frombuffer(raw, dtype="<f8").reshape(ncomp, nx, ny).copy()


def write_csv_field(path, field, xs=None, ys=None):
    """Write a single 2D field as x,y,value rows with a header line."""
    arr = np.asarray(field, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeMismatch(f"csv export needs a 2D field, got shape {arr.shape}")
    nx, ny = arr.shape
    xs = np.arange(nx) / nx if xs is None else np.asarray(xs)
    ys = np.arange(ny) / ny if ys is None else np.asarray(ys)
    with open(path, "w", encoding="ascii") as fh:
        fh.write("x,y,value\n")
        for i in range(nx):
            for j in range(ny):
                fh.write(f"{xs[i]!r},{ys[j]!r},{arr[i, j]!r}\n")


# --- JSON documents ---------------------------------------------------------

def write_json(path, doc):
    with open(path, "w", encoding="ascii") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with open(path, "r", encoding="ascii") as fh:
        return json.load(fh)


# --- scheme comparison ------------------------------------------------------

def per_variable_errors(primitives, reference) -> dict:
    """L1 and MSE per primitive variable plus their combined sums."""
    out = {}
    for i, name in enumerate(VARIABLES):
        out[name] = {
            "l1": l1_error(primitives[..., i], reference[..., i]),
            "mse": mse_loss(primitives[..., i], reference[..., i]),
        }
    out["combined"] = {
        "l1": euler_l1(primitives, reference),
        "mse": float(sum(out[n]["mse"] for n in VARIABLES)),
    }
    return out


def compare_table(spec, grids, baseline_cfg, candidate_cfg, reference_primitives):
    """Run two schemes over a list of grid sizes against one fine reference.

    ``reference_primitives`` holds the primitive final state on the fine
    grid, shape (fnx, fny, 4).  Every requested grid must nest inside it.
    Ratios are baseline error over candidate error, reported rounded to two
    decimals next to the full-precision raw values.
    """
    from .euler import GasModel
    from .solver import restrict, run
    from .euler import conserved_to_primitive

    gas = GasModel(spec.gamma)
    reference_primitives = np.asarray(reference_primitives, dtype=np.float64)
    rows = []
    for n in grids:
        ref = restrict(reference_primitives, n, n)
        cells = {}
        for role, cfg in (("baseline", baseline_cfg), ("candidate", candidate_cfg)):
            start = time.perf_counter()
            result = run(spec, n, n, cfg)
            wall = time.perf_counter() - start
            prim = conserved_to_primitive(result.grid.interior, gas)
            cells[role] = {
                "scheme": cfg.scheme,
                "errors": per_variable_errors(prim, ref),
                "n_steps": result.n_steps,
                "wall_time": wall,
                "primitives": prim,
            }
        ratios = {}
        for name in VARIABLES + ("combined",):
            base = cells["baseline"]["errors"][name]["l1"]
            cand = cells["candidate"]["errors"][name]["l1"]
            ratios[name] = round(base / cand, 2) if cand > 0 else float("inf")
        rows.append({
            "grid": [n, n],
            "baseline": {k: v for k, v in cells["baseline"].items() if k != "primitives"},
            "candidate": {k: v for k, v in cells["candidate"].items() if k != "primitives"},
            "ratio": ratios,
            "_fields": {role: cells[role]["primitives"] for role in cells},
        })
    return {
        "t_final": float(spec.t_final),
        "gamma": float(spec.gamma),
        "config_tag": int(spec.config_tag),
        "rows": rows,
    }


def format_table(table) -> str:
    """Aligned text rendering of a comparison table."""
    lines = []
    for row in table["rows"]:
        n = row["grid"][0]
        base, cand = row["baseline"], row["candidate"]
        lines.append(f"grid {n}x{n}   {base['scheme']} vs {cand['scheme']}"
                     f"   (T={table['t_final']})")
        lines.append(f"  {'var':>8} {'baseline L1':>14} {'candidate L1':>14} {'ratio':>7}")
        for name in VARIABLES:
            lines.append(
                f"  {name:>8} {base['errors'][name]['l1']:>14.6f} "
                f"{cand['errors'][name]['l1']:>14.6f} "
                f"{row['ratio'][name]:>7.2f}")
        lines.append("")
    return "\n".join(lines)


def table_document(table) -> dict:
    """Copy of a comparison table without in-memory field payloads."""
    doc = {k: v for k, v in table.items() if k != "rows"}
    doc["rows"] = [{k: v for k, v in row.items() if k != "_fields"}
                   for row in table["rows"]]
    return doc
