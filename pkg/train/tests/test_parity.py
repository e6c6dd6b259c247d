"""Cross-implementation parity: harness (torch) vs solver package.

The solver side is exercised through its external interfaces: the CLI for
time steps and the weight-file format for the network.
"""

import json

import numpy as np
import pytest
import torch

from conftest import run_solver_cli
from wenods_train.data import quadrant_initial_state, read_field
from wenods_train.model import MultiplierNet, export_weights, zero_net
from wenods_train.solver import rk3_step, stable_dt
from wenods_train.training import differentiable_step

GAMMA = 1.4
QUADRANTS = [[1.5, 0.0, 0.0, 1.5],
             [0.5323, 1.206, 0.0, 0.3],
             [0.138, 1.206, 1.206, 0.029],
             [0.5323, 0.0, 1.206, 0.3]]


def write_spec(path, t_final):
    path.write_text(json.dumps({
        "config_tag": 3, "gamma": GAMMA, "t_final": t_final,
        "quadrants": QUADRANTS,
    }))


def solver_one_step(tmp_path, scheme, dt, n, weights=None, eps=None):
    spec = tmp_path / "spec.json"
    write_spec(spec, dt)
    out = tmp_path / f"primary_{scheme}"
    argv = ["solve", "--ic", spec, "--grid", f"{n}x{n}", "--scheme", scheme,
            "--t-final", dt, "--out", out]
    if weights is not None:
        argv += ["--weights", weights]
    if eps is not None:
        argv += ["--eps", eps]
    assert run_solver_cli(*argv) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["n_steps"] == 1
    return np.moveaxis(read_field(out / "final.f64grid"), 0, -1)


def harness_state(n):
    return torch.from_numpy(quadrant_initial_state(np.asarray(QUADRANTS), GAMMA, n))


def test_cnn_forward_parity_on_random_inputs(tmp_path, rng):
    import wenods.cnn as solver_cnn

    net = MultiplierNet("A", seed=2)
    path = tmp_path / "weights.json"
    export_weights(net, path)
    model = solver_cnn.load_weights(path)
    worst = 0.0
    for _ in range(100):
        x = rng.standard_normal((4, 11))
        torch_out = net(torch.from_numpy(x)[None]).detach().numpy()[0]
        solver_out = solver_cnn.forward(model, x)
        worst = max(worst, np.abs(torch_out - solver_out).max())
    assert worst < 1e-6, worst
    assert worst < 1e-12   # in practice the two agree to rounding


def test_one_ds_step_matches_solver_package(tmp_path):
    n = 24
    dt = 1e-4   # far below the stability limit, so the solver takes one step
    net = MultiplierNet("A", seed=4)
    weights = tmp_path / "weights.json"
    export_weights(net, weights)
    reference = solver_one_step(tmp_path, "ds-z", dt, n, weights=weights)
    state = harness_state(n)
    stepped = differentiable_step(state, dt, GAMMA, net).detach().numpy()
    gap = np.abs(stepped - reference).max()
    assert gap < 1e-6, gap


def test_zero_weight_step_matches_plain_scheme_eps_zero(tmp_path):
    n = 20
    dt = 1e-4
    net = zero_net("A")
    reference = solver_one_step(tmp_path, "z", dt, n, eps=0.0)
    state = harness_state(n)
    stepped = rk3_step(state, dt, GAMMA, model=net, eps=0.0).detach().numpy()
    gap = np.abs(stepped - reference).max()
    assert gap < 1e-6, gap


def test_adaptive_dt_matches_solver_convention():
    state = harness_state(32)
    dt = stable_dt(state, GAMMA, 1 / 32, 1 / 32)
    rho, u, v, p = state[..., 0], 0, 0, 0   # builtin four-shock corner speeds
    # quadrant 3 dominates: |V| + c with V = 1.206*sqrt(2), c = sqrt(1.4*0.029/0.138)
    a = 1.206 * np.sqrt(2.0) + np.sqrt(1.4 * 0.029 / 0.138)
    assert dt == pytest.approx(0.6 * (1 / 32) / a, rel=1e-12)
