"""Training loop: problem mixing, single-step losses, validation tracking.

One training step advances one open problem by one coarse time step with
the current network, brings the stored fine reference to the same time
(one clipped fine step from the nearest stored snapshot, sub-stepping only
if the snapshot spacing demands it), and takes an optimiser step on the
summed primitive-variable MSE.  Problems are mixed by opening new ones
with a fixed probability and otherwise resuming a uniformly chosen open
one, so the batch distribution covers many initial data and times.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field

import numpy as np
import torch

from .data import QuadrantProblem, load_manifest, quadrant_initial_state, restrict
from .model import MultiplierNet, export_weights
from .solver import (BlowUp, advance_to, check_physical, primitives, rk3_step,
                     stable_dt)


@dataclass
class TrainConfig:
    manifest: str
    out_dir: str
    coarse_grid: int = 100
    arch_tag: str = "A"
    lr: float = 1e-3
    new_problem_prob: float = 0.5
    max_open_problems: int = 150
    max_steps: int = 4000
    validation_manifest: str | None = None
    validation_period: int = 100
    seed: int = 0
    eps: float = 1e-6
    c_ds: float = 0.1
    init_scale: float = 0.1

    @classmethod
    def from_json(cls, path) -> "TrainConfig":
        with open(path) as fh:
            doc = json.load(fh)
        return cls(**{k.replace("-", "_"): v for k, v in doc.items()})


@dataclass(eq=False)      # identity semantics: entries live in the open pool
class OpenProblem:
    index: int
    problem: QuadrantProblem
    state: torch.Tensor
    t: float = 0.0


def coarse_initial_state(problem: QuadrantProblem, n: int) -> torch.Tensor:
    return torch.from_numpy(quadrant_initial_state(problem.quadrants,
                                                   problem.gamma, n))


def reference_at(problem: QuadrantProblem, target: float, coarse_n: int,
                 zform: bool = True) -> torch.Tensor:
    """Coarse reference at an arbitrary time inside the stored trajectory.

    Takes the nearest stored fine snapshot at t_n <= target, advances it to
    the target with plain fifth-order steps (clipped; sub-stepped when the
    gap exceeds the stability limit), and restricts to the coarse grid.
    """
    if target > problem.t_final * (1 + 1e-12):
        raise KeyError(f"target {target} beyond final time {problem.t_final}")
    t_n, path = problem.nearest_snapshot_at_or_before(target)
    fine = torch.from_numpy(problem.load_snapshot(path))
    nfx, nfy = fine.shape[0], fine.shape[1]
    if target - t_n > 1e-14:
        fine = advance_to(fine, problem.gamma, t_n, target,
                          1.0 / nfx, 1.0 / nfy, model=None, zform=zform)
    return torch.from_numpy(restrict(fine.numpy(), coarse_n))


def primitive_mse(state: torch.Tensor, target: torch.Tensor, gamma: float):
    """Summed per-variable mean-square error on (rho, u, v, p)."""
    loss = state.new_zeros(())
    for got, ref in zip(primitives(state, gamma), primitives(target, gamma)):
        diff = got - ref
        loss = loss + (diff * diff).mean()
    return loss


def primitive_l1(state: torch.Tensor, target: torch.Tensor, gamma: float) -> float:
    total = 0.0
    for got, ref in zip(primitives(state, gamma), primitives(target, gamma)):
        total += float((got - ref).abs().mean())
    return total


def differentiable_step(state: torch.Tensor, dt: float, gamma: float,
                        net: MultiplierNet, eps: float = 1e-6,
                        c_ds: float = 0.1) -> torch.Tensor:
    """One deep-smoothness step carrying gradients to the network."""
    out = rk3_step(state, dt, gamma, model=net, eps=eps, c_ds=c_ds)
    check_physical(out.detach(), gamma)
    return out


def validate(net: MultiplierNet, problems, coarse_n: int, eps: float,
             c_ds: float) -> list:
    """Full coarse solves of the validation problems with the current net."""
    errors = []
    for problem in problems:
        state = coarse_initial_state(problem, coarse_n)
        try:
            state = advance_to(state, problem.gamma, 0.0, problem.t_final,
                               1.0 / coarse_n, 1.0 / coarse_n, model=net,
                               eps=eps, c_ds=c_ds)
            reference = reference_at(problem, problem.t_final, coarse_n)
            errors.append(primitive_l1(state, reference, problem.gamma))
        except BlowUp:
            errors.append(float("inf"))
    return errors


def rescale_series(series: np.ndarray) -> np.ndarray:
    peak = series.max(axis=1, keepdims=True)
    return series / np.where(peak > 0, peak, 1.0)


def train(config: TrainConfig, log_fn=print) -> dict:
    torch.manual_seed(config.seed)
    rng = np.random.default_rng(config.seed)
    os.makedirs(config.out_dir, exist_ok=True)

    _, problems = load_manifest(config.manifest)
    if not problems:
        raise ValueError(f"no problems in {config.manifest}")
    val_problems = []
    if config.validation_manifest:
        _, val_problems = load_manifest(config.validation_manifest)

    net = MultiplierNet(config.arch_tag, seed=config.seed,
                        init_scale=config.init_scale)
    optimiser = torch.optim.Adam(net.parameters(), lr=config.lr)

    n = config.coarse_grid
    pool: list[OpenProblem] = []
    selection_log = []
    pool_sizes = []
    val_steps, val_errors, checkpoints = [], [], []
    losses = []
    blowups = 0
    consecutive_blowups = 0
    start = time.perf_counter()

    def checkpoint(step):
        path = os.path.join(config.out_dir, f"ckpt_{step:06d}.json")
        export_weights(net, path)
        return path

    for step in range(1, config.max_steps + 1):
        open_new = (not pool) or (len(pool) < config.max_open_problems
                                  and rng.random() < config.new_problem_prob)
        if open_new:
            idx = int(rng.integers(len(problems)))
            entry = OpenProblem(index=idx, problem=problems[idx],
                                state=coarse_initial_state(problems[idx], n))
            pool.append(entry)
        else:
            entry = pool[int(rng.integers(len(pool)))]
        selection_log.append(entry.index)
        pool_sizes.append(len(pool))

        gamma = entry.problem.gamma
        dt = stable_dt(entry.state, gamma, 1.0 / n, 1.0 / n)
        remaining = entry.problem.t_final - entry.t
        if dt >= remaining * (1 - 1e-12):
            dt = remaining
        try:
            advanced = differentiable_step(entry.state, dt, gamma, net,
                                           eps=config.eps, c_ds=config.c_ds)
            target = reference_at(entry.problem, entry.t + dt, n)
            loss = primitive_mse(advanced, target, gamma)
            if not torch.isfinite(loss):
                raise BlowUp("non-finite loss")
            optimiser.zero_grad()
            loss.backward()
            optimiser.step()
            losses.append(float(loss.detach()))
            entry.state = advanced.detach()
            entry.t = entry.t + dt
        except BlowUp as exc:
            blowups += 1
            consecutive_blowups += 1
            log_fn(f"[train] step {step}: problem {entry.index} dropped ({exc})")
            if entry in pool:
                pool.remove(entry)
            if consecutive_blowups > 2 * len(problems):
                raise RuntimeError("every attempted problem blows up; aborting")
            continue
        consecutive_blowups = 0
        if entry.t >= entry.problem.t_final * (1 - 1e-12):
            pool.remove(entry)

        if val_problems and step % config.validation_period == 0:
            errors = validate(net, val_problems, n, config.eps, config.c_ds)
            val_steps.append(step)
            val_errors.append(errors)
            checkpoints.append(checkpoint(step))
            log_fn(f"[train] step {step}: loss {losses[-1]:.3e} "
                   f"validation {np.round(errors, 5).tolist()}")

    final_path = checkpoint(config.max_steps)
    log = {
        "config": {k: getattr(config, k) for k in vars(config)},
        "selection": selection_log,
        "pool_sizes": pool_sizes,
        "losses": losses,
        "blowups": blowups,
        "wall_time": time.perf_counter() - start,
        "validation_steps": val_steps,
        "validation_errors": val_errors,
        "checkpoints": checkpoints,
        "final_checkpoint": final_path,
    }
    if val_errors:
        series = np.asarray(val_errors, dtype=float).T   # problem x checkpoint
        rescaled = rescale_series(series)
        log["validation_rescaled"] = rescaled.tolist()
        mean_curve = rescaled.mean(axis=0)
        best = int(np.argmin(mean_curve))
        log["best_checkpoint"] = checkpoints[best]
        log["best_step"] = val_steps[best]
    with open(os.path.join(config.out_dir, "validation_log.json"), "w") as fh:
        json.dump(log, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return log
