"""2D solve orchestration: grid, ghost handling, RHS assembly, RK3, runs.

The two sweep directions share one kernel: the x sweep feeds it transposed
lines, the y sweep feeds momentum-swapped lines.  Both reduce to the same
array operation, which makes the solver exactly symmetric under exchanging
x and y (and is what the symmetry tests rely on).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as kernels
from .cnn import CnnModel
from .errors import AlignmentError, MissingModel, NonPhysicalState
from .euler import (GasModel, adaptive_dt, axis_wave_speed, conserved_to_primitive,
                    max_wave_speed, primitive_to_conserved)
from .riemann import RiemannSpec
from .weno import C_DEFAULT, EPS_DEFAULT, SCHEMES

ZERO_GRADIENT = "zero-gradient"
PERIODIC = "periodic"

SNAP_FINAL = "final"
SNAP_EVERY_STEP = "every-step"


@dataclass
class SchemeConfig:
    """Reconstruction scheme plus its knobs.

    Deep-smoothness schemes ("ds-js", "ds-z") require ``model``; plain runs
    leave it None.  ``snapshot_every`` = 0 keeps only the final state, 1
    records every accepted step, m > 1 every m-th step (plus the final one).
    """

    scheme: str = "z"
    eps: float = EPS_DEFAULT
    c_ds: float = C_DEFAULT
    cfl: float = 0.6
    boundary: str = ZERO_GRADIENT
    model: CnnModel | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.boundary not in (ZERO_GRADIENT, PERIODIC):
            raise ValueError(f"unknown boundary treatment {self.boundary!r}")
        if self.is_ds and self.model is None:
            raise MissingModel(f"scheme {self.scheme!r} needs a loaded CNN model")

    @property
    def is_ds(self) -> bool:
        return self.scheme.startswith("ds-")

    @property
    def ghost(self) -> int:
        halo = 3
        if self.is_ds:
            halo += max(0, self.model.k - 1)
        return halo


@dataclass
class FieldGrid:
    """Uniform node grid with ghost frame; conserved states in ``data``.

    Interior nodes sit at x_i = i/nx, y_j = j/ny for 0 <= i < nx,
    0 <= j < ny (left-aligned, so a 400-point grid restricts onto a
    100-point one by plain subsampling).
    """

    nx: int
    ny: int
    ghost: int
    data: np.ndarray

    @property
    def dx(self) -> float:
        return 1.0 / self.nx

    @property
    def dy(self) -> float:
        return 1.0 / self.ny

    @property
    def interior(self) -> np.ndarray:
        g = self.ghost
        return self.data[g:g + self.nx, g:g + self.ny]

    def x_nodes(self):
        return np.arange(self.nx) / self.nx

    def y_nodes(self):
        return np.arange(self.ny) / self.ny

    def copy(self) -> "FieldGrid":
        return FieldGrid(self.nx, self.ny, self.ghost, self.data.copy())

    @classmethod
    def empty(cls, nx: int, ny: int, ghost: int) -> "FieldGrid":
        data = np.zeros((nx + 2 * ghost, ny + 2 * ghost, 4))
        return cls(nx=nx, ny=ny, ghost=ghost, data=data)

    @classmethod
    def from_interior(cls, interior, ghost: int) -> "FieldGrid":
        interior = np.asarray(interior, dtype=np.float64)
        nx, ny = interior.shape[:2]
        grid = cls.empty(nx, ny, ghost)
        grid.interior[...] = interior
        return grid

    @classmethod
    def from_riemann(cls, spec: RiemannSpec, nx: int, ny: int, ghost: int,
                     gas: GasModel | None = None) -> "FieldGrid":
        """Fill the interior with the four quadrant states.

        Nodes exactly on a 0.5 line belong to the upper/right quadrants,
        which keeps the discrete data symmetric for symmetric specs.
        """
        gas = gas or GasModel(spec.gamma)
        grid = cls.empty(nx, ny, ghost)
        right = grid.x_nodes() >= 0.5
        top = grid.y_nodes() >= 0.5
        quadrant = np.empty((nx, ny), dtype=np.intp)
        quadrant[np.ix_(right, top)] = 0
        quadrant[np.ix_(~right, top)] = 1
        quadrant[np.ix_(~right, ~top)] = 2
        quadrant[np.ix_(right, ~top)] = 3
        conserved = primitive_to_conserved(spec.states, gas)
        grid.interior[...] = conserved[quadrant]
        return grid


def fill_ghosts(grid: FieldGrid, boundary: str = ZERO_GRADIENT):
    g = grid.ghost
    d = grid.data
    if boundary == ZERO_GRADIENT:
        d[:g] = d[g]
        d[g + grid.nx:] = d[g + grid.nx - 1]
        d[:, :g] = d[:, g:g + 1]
        d[:, g + grid.ny:] = d[:, g + grid.ny - 1:g + grid.ny]
    elif boundary == PERIODIC:
        d[:g] = d[grid.nx:g + grid.nx]
        d[g + grid.nx:] = d[g:2 * g]
        d[:, :g] = d[:, grid.ny:g + grid.ny]
        d[:, g + grid.ny:] = d[:, g:2 * g]
    else:
        raise ValueError(f"unknown boundary treatment {boundary!r}")
    return grid


def directional_rhs(grid: FieldGrid, cfg: SchemeConfig, gas: GasModel,
                    axis: str, alpha: float | None = None, capture=None):
    """Tendency contribution of one sweep direction (ghosts must be filled)."""
    g = grid.ghost
    if axis == "x":
        if alpha is None:
            alpha = axis_wave_speed(grid.interior, gas, "x")
        lines = np.ascontiguousarray(grid.data.transpose(1, 0, 2)[g:g + grid.ny])
        out = kernels.sweep(lines, g, gas.gamma, alpha, grid.nx, cfg.scheme,
                            cfg.eps, cfg.c_ds, model=cfg.model, capture=capture)
        return np.ascontiguousarray(out.transpose(1, 0, 2))
    if axis == "y":
        if alpha is None:
            alpha = axis_wave_speed(grid.interior, gas, "y")
        lines = grid.data[g:g + grid.nx].copy()
        lines[..., [1, 2]] = lines[..., [2, 1]]
        out = kernels.sweep(lines, g, gas.gamma, alpha, grid.ny, cfg.scheme,
                            cfg.eps, cfg.c_ds, model=cfg.model, capture=capture)
        out[..., [1, 2]] = out[..., [2, 1]]
        return out
    raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")


def rhs(grid: FieldGrid, cfg: SchemeConfig, gas: GasModel):
    """Full tendency -dF/dx - dG/dy on the interior nodes."""
    fill_ghosts(grid, cfg.boundary)
    return (directional_rhs(grid, cfg, gas, "x")
            + directional_rhs(grid, cfg, gas, "y"))


def rk3_combine(u0, rhs_fn, dt: float):
    """Three-stage strong-stability-preserving combination.

    Stage weights are (1), (3/4, 1/4, 1/4) and (1/3, 2/3, 2/3); for a linear
    autonomous right-hand side one step reproduces the cubic Taylor
    polynomial of the exact propagator.
    """
    u1 = u0 + dt * rhs_fn(u0)
    u2 = 0.75 * u0 + 0.25 * u1 + 0.25 * dt * rhs_fn(u1)
    return u0 / 3.0 + (2.0 / 3.0) * u2 + (2.0 / 3.0) * dt * rhs_fn(u2)


def rk3_step(grid: FieldGrid, dt: float, cfg: SchemeConfig, gas: GasModel) -> FieldGrid:
    """Advance one step; returns a new grid, the input is left untouched."""
    work = grid.copy()

    def rhs_of(interior):
        work.interior[...] = interior
        return rhs(work, cfg, gas)

    out = grid.copy()
    out.interior[...] = rk3_combine(grid.interior.copy(), rhs_of, dt)
    return out


@dataclass
class Snapshot:
    time: float
    tag: str
    data: np.ndarray | None = None
    path: str | None = None


@dataclass
class RunResult:
    grid: FieldGrid
    snapshots: list
    n_steps: int
    wall_time: float
    times: list = field(default_factory=list)


def run(spec: RiemannSpec, nx: int, ny: int, cfg: SchemeConfig,
        snapshot_every: int = 0,
        on_snapshot=None) -> RunResult:
    """Integrate a Riemann problem to its final time.

    The adaptive step is cfl*min(dx,dy)/a with the final step clipped so the
    run ends exactly at T.  ``snapshot_every`` follows SchemeConfig's
    convention; ``on_snapshot(step_index, time, grid)`` can divert payloads
    to disk, in which case the returned snapshots carry no array data.
    """
    gas = GasModel(spec.gamma)
    grid = FieldGrid.from_riemann(spec, nx, ny, cfg.ghost, gas)
    tag = f"{nx}x{ny}"
    t_final = float(spec.t_final)

    def record(step, t):
        if on_snapshot is not None:
            path = on_snapshot(step, t, grid)
            snaps.append(Snapshot(time=t, tag=tag, path=path))
        else:
            snaps.append(Snapshot(time=t, tag=tag, data=grid.interior.copy()))

    snaps: list = []
    times = [0.0]
    if snapshot_every >= 1:
        record(0, 0.0)
    t = 0.0
    steps = 0
    start = time.perf_counter()
    while t_final > 0.0 and t < t_final * (1.0 - 1e-15):
        a = max_wave_speed(grid.interior, gas)
        dt = adaptive_dt(a, grid.dx, grid.dy, cfg.cfl)
        remaining = t_final - t
        last = dt >= remaining * (1.0 - 1e-12)
        if last:
            dt = remaining
        try:
            grid = rk3_step(grid, dt, cfg, gas)
            conserved_to_primitive(grid.interior, gas)
        except NonPhysicalState as exc:
            raise NonPhysicalState(
                f"blow-up at t={t:.6g} after {steps} steps: {exc}") from exc
        steps += 1
        t = t_final if last else t + dt
        times.append(t)
        if snapshot_every >= 1 and (steps % snapshot_every == 0 or last):
            record(steps, t)
    wall = time.perf_counter() - start
    if snapshot_every < 1:
        record(steps, t_final if t_final > 0 else 0.0)
    return RunResult(grid=grid, snapshots=snaps, n_steps=steps,
                     wall_time=wall, times=times)


def restrict(fine, coarse_nx: int, coarse_ny: int):
    """Subsample a fine interior field onto an aligned coarse grid.

    Left-aligned grids make coarse node (i, j) coincide with fine node
    (r*i, r*j); no averaging is involved.
    """
    fine = np.asarray(fine)
    fx, fy = fine.shape[:2]
    if fx % coarse_nx or fy % coarse_ny:
        raise AlignmentError(
            f"fine grid {fx}x{fy} does not nest on coarse {coarse_nx}x{coarse_ny}")
    return fine[::fx // coarse_nx, ::fy // coarse_ny]


def make_reference(spec: RiemannSpec, out_dir, nx: int = 400, ny: int = 400,
                   cfg: SchemeConfig | None = None, snapshot_every: int = 1,
                   label: str = "problem") -> dict:
    """Fine-grid trajectory persisted snapshot-by-snapshot.

    Returns the manifest entry describing the stored files.  The default
    configuration is the plain tau5 scheme, the standard reference choice.
    """
    from . import metrics

    import os

    cfg = cfg or SchemeConfig(scheme="z")
    os.makedirs(out_dir, exist_ok=True)
    files = []

    def persist(step, t, grid):
        name = f"{label}_snap_{len(files):06d}.f64grid"
        path = os.path.join(out_dir, name)
        metrics.write_field(path, np.moveaxis(grid.interior, -1, 0))
        files.append({"time": float(t), "file": name})
        return path

    result = run(spec, nx, ny, cfg, snapshot_every=snapshot_every,
                 on_snapshot=persist)
    return {
        "spec": spec.to_dict(),
        "t_final": float(spec.t_final),
        "fine_grid": [nx, ny],
        "scheme": cfg.scheme,
        "snapshot_every": snapshot_every,
        "n_steps": result.n_steps,
        "wall_time": result.wall_time,
        "snapshots": files,
    }
