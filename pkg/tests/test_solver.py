import numpy as np
import pytest

from conftest import random_conserved
from wenods.cnn import random_model, zero_model
from wenods.errors import AlignmentError, MissingModel, NonPhysicalState
from wenods.euler import (GasModel, adaptive_dt, max_wave_speed,
                          primitive_to_conserved)
from wenods.riemann import builtin_ic, RiemannSpec
from wenods.solver import (FieldGrid, SchemeConfig, directional_rhs, fill_ghosts,
                           make_reference, restrict, rhs, rk3_combine, rk3_step, run)

GAS = GasModel(1.4)


def advection_grid(n, ghost=3):
    """Smooth periodic density wave riding on a uniform diagonal flow."""
    x = np.arange(n) / n
    y = np.arange(n) / n
    rho = 1.0 + 0.2 * np.sin(2 * np.pi * (x[:, None] + y[None, :]))
    w = np.empty((n, n, 4))
    w[..., 0] = rho
    w[..., 1] = 1.0
    w[..., 2] = 1.0
    w[..., 3] = 1.0
    return FieldGrid.from_interior(primitive_to_conserved(w, GAS), ghost)


def advection_rhs_exact(n):
    x = np.arange(n) / n
    y = np.arange(n) / n
    drho = 0.4 * np.pi * np.cos(2 * np.pi * (x[:, None] + y[None, :]))
    return -(drho + drho)[..., None] * np.ones(4)


def test_scheme_config_validation():
    with pytest.raises(ValueError):
        SchemeConfig(scheme="weno9")
    with pytest.raises(MissingModel):
        SchemeConfig(scheme="ds-z")
    assert SchemeConfig(scheme="z").ghost == 3
    rng = np.random.default_rng(0)
    assert SchemeConfig(scheme="ds-z", model=random_model(rng, "B")).ghost == 4


def test_grid_nodes_and_interior():
    grid = FieldGrid.empty(10, 20, 3)
    assert grid.dx == 0.1 and grid.dy == 0.05
    assert grid.interior.shape == (10, 20, 4)
    assert grid.x_nodes()[0] == 0.0 and grid.x_nodes()[-1] == 0.9


def test_riemann_grid_quadrant_assignment():
    spec = builtin_ic("config3")
    grid = FieldGrid.from_riemann(spec, 4, 4, 3)
    w = spec.states
    q = primitive_to_conserved(w, GAS)
    # node (2,2) sits exactly on (0.5, 0.5) and belongs to quadrant 1
    assert np.allclose(grid.interior[2, 2], q[0])
    assert np.allclose(grid.interior[0, 2], q[1])
    assert np.allclose(grid.interior[0, 0], q[2])
    assert np.allclose(grid.interior[2, 0], q[3])


def test_fill_ghosts_replicate():
    grid = FieldGrid.from_interior(np.arange(4 * 9.0).reshape(3, 3, 4), 3)
    fill_ghosts(grid, "zero-gradient")
    assert (grid.data[0, 3] == grid.data[3, 3]).all()
    assert (grid.data[-1, 3] == grid.data[5, 3]).all()
    assert (grid.data[3, 0] == grid.data[3, 3]).all()


def test_fill_ghosts_periodic():
    grid = FieldGrid.from_interior(np.arange(4 * 9.0).reshape(3, 3, 4), 3)
    fill_ghosts(grid, "periodic")
    assert (grid.data[2] == grid.data[5]).all()
    assert (grid.data[6] == grid.data[3]).all()


@pytest.mark.parametrize("scheme", ["js", "z", "ds-z"])
def test_uniform_state_has_zero_tendency(scheme):
    rng = np.random.default_rng(8)
    model = random_model(rng, "A") if scheme.startswith("ds-") else None
    cfg = SchemeConfig(scheme=scheme, model=model)
    state = primitive_to_conserved(np.array([1.3, 0.4, -0.2, 0.9]), GAS)
    grid = FieldGrid.from_interior(np.tile(state, (12, 12, 1)), cfg.ghost)
    assert np.abs(rhs(grid, cfg, GAS)).max() < 1e-13


def test_one_dimensional_data_has_no_cross_tendency():
    # a Riemann jump in x, constant along y: the y sweep contributes nothing
    cfg = SchemeConfig(scheme="z")
    left = primitive_to_conserved(np.array([1.0, 0.75, 0.0, 1.0]), GAS)
    right = primitive_to_conserved(np.array([0.125, 0.0, 0.0, 0.1]), GAS)
    interior = np.where(np.arange(16)[:, None, None] < 8, left, right)
    grid = FieldGrid.from_interior(np.broadcast_to(interior, (16, 12, 4)), cfg.ghost)
    fill_ghosts(grid, cfg.boundary)
    ly = directional_rhs(grid, cfg, GAS, "y")
    assert np.abs(ly).max() < 1e-12
    lx = directional_rhs(grid, cfg, GAS, "x")
    assert np.abs(lx).max() > 1e-3
    assert np.abs(np.diff(lx, axis=1)).max() < 1e-12


def test_rhs_converges_at_fifth_order():
    errors = []
    for n in (25, 50, 100):
        grid = advection_grid(n)
        cfg = SchemeConfig(scheme="z", boundary="periodic")
        err = np.abs(rhs(grid, cfg, GAS) - advection_rhs_exact(n))
        errors.append(np.mean(err[..., 0]))
    orders = [np.log2(errors[i] / errors[i + 1]) for i in range(2)]
    assert min(orders) >= 4.5, (errors, orders)


def test_rk3_fixed_point():
    u0 = np.arange(10.0)
    out = rk3_combine(u0, lambda u: np.zeros_like(u), 0.1)
    assert (out == u0).all()


def test_rk3_matches_cubic_taylor_polynomial():
    # for u' = lam*u one step is exactly the cubic Taylor polynomial
    lam, dt = -0.7, 0.213
    z = lam * dt
    got = rk3_combine(np.array([1.0]), lambda u: lam * u, dt)[0]
    assert got == pytest.approx(1 + z + z * z / 2 + z ** 3 / 6, abs=1e-15)


def test_rk3_stage_structure():
    # recover the displayed convex coefficients by probing with a stub rhs
    seen = []

    def probe(u):
        seen.append(u.copy())
        return np.ones_like(u)

    u0 = np.array([2.0])
    dt = 0.4
    out = rk3_combine(u0, probe, dt)
    u1 = u0 + dt
    u2 = 0.75 * u0 + 0.25 * u1 + 0.25 * dt
    assert seen[0] == u0
    assert seen[1] == u1
    assert seen[2] == u2
    assert out[0] == pytest.approx(u0[0] / 3 + 2 / 3 * u2[0] + 2 / 3 * dt, abs=1e-15)


def test_rk3_step_keeps_input_grid():
    spec = builtin_ic("config2")
    cfg = SchemeConfig(scheme="z")
    grid = FieldGrid.from_riemann(spec, 20, 20, cfg.ghost)
    before = grid.interior.copy()
    dt = adaptive_dt(max_wave_speed(grid.interior, GAS), grid.dx, grid.dy)
    after = rk3_step(grid, dt, cfg, GAS)
    assert (grid.interior == before).all()
    assert np.abs(after.interior - before).max() > 0


def test_run_zero_time_returns_initial_condition():
    spec = builtin_ic("config2")
    frozen = RiemannSpec(states=spec.states, gamma=spec.gamma, t_final=0.0,
                         config_tag=2)
    result = run(frozen, 16, 16, SchemeConfig(scheme="z"))
    assert result.n_steps == 0
    grid = FieldGrid.from_riemann(frozen, 16, 16, 3)
    assert (result.grid.interior == grid.interior).all()
    assert len(result.snapshots) == 1 and result.snapshots[0].time == 0.0


def test_run_ends_exactly_at_final_time_with_snapshots():
    spec = builtin_ic("config2")
    short = RiemannSpec(states=spec.states, gamma=spec.gamma, t_final=0.015,
                        config_tag=2)
    result = run(short, 24, 24, SchemeConfig(scheme="z"), snapshot_every=1)
    times = [s.time for s in result.snapshots]
    assert times[0] == 0.0
    assert times[-1] == 0.015
    assert all(b > a for a, b in zip(times, times[1:]))
    assert result.n_steps == len(times) - 1


def test_run_dt_scales_with_grid():
    spec = builtin_ic("config2")
    short = RiemannSpec(states=spec.states, gamma=spec.gamma, t_final=0.01,
                        config_tag=2)
    steps = {}
    for n in (20, 40):
        steps[n] = run(short, n, n, SchemeConfig(scheme="z")).n_steps
    ratio = steps[40] / steps[20]
    assert 1.8 <= ratio <= 2.2


def test_restrict_semantics():
    x = np.arange(8) / 8
    fine = x[:, None] + x[None, :]
    coarse = restrict(fine, 4, 4)
    xc = np.arange(4) / 4
    assert np.abs(coarse - (xc[:, None] + xc[None, :])).max() == 0.0
    assert (restrict(np.full((8, 8), 3.3), 2, 2) == 3.3).all()
    sine = np.sin(2 * np.pi * (np.arange(12) / 12.0))[:, None] * np.ones(12)
    assert np.abs(restrict(sine, 6, 6)
                  - np.sin(2 * np.pi * np.arange(6) / 6.0)[:, None]).max() < 1e-15
    with pytest.raises(AlignmentError):
        restrict(fine, 3, 3)


@pytest.mark.parametrize("scheme", ["z", "ds-z"])
def test_conservation_on_periodic_run(scheme):
    rng = np.random.default_rng(21)
    model = random_model(rng, "A") if scheme.startswith("ds-") else None
    cfg = SchemeConfig(scheme=scheme, boundary="periodic", model=model)
    grid = advection_grid(32, cfg.ghost)
    dt = 0.3 * adaptive_dt(max_wave_speed(grid.interior, GAS), grid.dx, grid.dy)
    totals0 = grid.interior.sum(axis=(0, 1))
    for _ in range(100):
        grid = rk3_step(grid, dt, cfg, GAS)
    drift = np.abs(grid.interior.sum(axis=(0, 1)) - totals0) / np.abs(totals0)
    assert drift.max() < 1e-10


@pytest.mark.parametrize("scheme", ["z", "ds-z"])
def test_transpose_symmetry_is_exact(scheme):
    rng = np.random.default_rng(77)
    model = random_model(rng, "A") if scheme.startswith("ds-") else None
    cfg = SchemeConfig(scheme=scheme, model=model)
    spec = builtin_ic("config3")
    short = RiemannSpec(states=spec.states, gamma=spec.gamma, t_final=0.02,
                        config_tag=3)
    result = run(short, 24, 24, cfg)
    q = result.grid.interior
    assert np.abs(q[..., 0] - q[..., 0].T).max() < 1e-12
    assert np.abs(q[..., 1] - q[..., 2].T).max() < 1e-12
    assert np.abs(q[..., 3] - q[..., 3].T).max() < 1e-12


@pytest.mark.parametrize("pair", [("ds-z", "z"), ("ds-js", "js")])
def test_zero_model_with_zero_eps_degenerates_to_baseline(pair):
    ds_scheme, base_scheme = pair
    spec = builtin_ic("config2")
    model = zero_model("A")
    grids = {}
    for scheme, mdl in ((ds_scheme, model), (base_scheme, None)):
        cfg = SchemeConfig(scheme=scheme, eps=0.0, model=mdl)
        grid = FieldGrid.from_riemann(spec, 36, 36, cfg.ghost)
        for _ in range(10):
            dt = adaptive_dt(max_wave_speed(grid.interior, GAS), grid.dx, grid.dy)
            grid = rk3_step(grid, dt, cfg, GAS)
        grids[scheme] = grid.interior
    assert np.abs(grids[ds_scheme] - grids[base_scheme]).max() < 1e-12


def test_blowup_reports_location():
    cfg = SchemeConfig(scheme="z")
    state = primitive_to_conserved(np.array([1.0, 0.0, 0.0, 1.0]), GAS)
    interior = np.tile(state, (16, 16, 1))
    interior[8, 8, 3] = -1.0   # negative energy cell
    grid = FieldGrid.from_interior(interior, cfg.ghost)
    with pytest.raises(NonPhysicalState):
        rhs(grid, cfg, GAS)


def test_run_propagates_blowup_with_time_stamp():
    # vacuum-adjacent opposed jets collapse the pressure within a few steps
    w = np.tile(np.array([0.01, 0.0, 0.0, 1e-8]), (4, 1))
    w[0] = [1.0, -3.0, -3.0, 1e-6]
    w[2] = [1.0, 3.0, 3.0, 1e-6]
    with pytest.raises((NonPhysicalState,)):
        spec = RiemannSpec(states=w, gamma=1.4, t_final=0.1, config_tag=0)
        run(spec, 24, 24, SchemeConfig(scheme="z"))


def test_make_reference_writes_aligned_snapshots(tmp_path):
    spec = builtin_ic("config2")
    short = RiemannSpec(states=spec.states, gamma=spec.gamma, t_final=0.01,
                        config_tag=2)
    entry = make_reference(short, tmp_path, nx=20, ny=20, snapshot_every=1)
    assert entry["fine_grid"] == [20, 20]
    times = [s["time"] for s in entry["snapshots"]]
    assert times[0] == 0.0 and times[-1] == 0.01
    assert all(b > a for a, b in zip(times, times[1:]))
    from wenods.metrics import read_field
    first = read_field(tmp_path / entry["snapshots"][0]["file"])
    grid = FieldGrid.from_riemann(short, 20, 20, 3)
    assert (np.moveaxis(first, 0, -1) == grid.interior).all()


def test_make_reference_is_deterministic(tmp_path):
    spec = builtin_ic("config2")
    short = RiemannSpec(states=spec.states, gamma=spec.gamma, t_final=0.008,
                        config_tag=2)
    e1 = make_reference(short, tmp_path / "a", nx=16, ny=16)
    e2 = make_reference(short, tmp_path / "b", nx=16, ny=16)
    assert [s["time"] for s in e1["snapshots"]] == [s["time"] for s in e2["snapshots"]]
    last1 = (tmp_path / "a" / e1["snapshots"][-1]["file"]).read_bytes()
    last2 = (tmp_path / "b" / e2["snapshots"][-1]["file"]).read_bytes()
    assert last1 == last2
