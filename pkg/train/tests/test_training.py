import json

import numpy as np
import pytest
import torch

from wenods_train.data import load_manifest, restrict
from wenods_train.model import load_weights as load_net
from wenods_train.training import (TrainConfig, coarse_initial_state, reference_at,
                                   train)


def test_reference_at_stored_time_is_pure_restriction(tiny_dataset):
    _, problems = load_manifest(tiny_dataset / "manifest.json")
    problem = problems[0]
    t = problem.snapshot_times[3]
    got = reference_at(problem, t, 20).numpy()
    fine = problem.load_snapshot(problem.snapshot_paths[3])
    assert np.abs(got - restrict(fine, 20)).max() == 0.0


def test_reference_at_bridges_between_snapshots(tiny_dataset):
    _, problems = load_manifest(tiny_dataset / "manifest.json")
    problem = problems[0]
    # drop every other stored snapshot and ask for a time that only the
    # dense trajectory holds: the bridged value must match it closely
    import dataclasses
    thinned = dataclasses.replace(
        problem,
        snapshot_times=problem.snapshot_times[::2],
        snapshot_paths=problem.snapshot_paths[::2])
    t_dense = problem.snapshot_times[3]
    assert t_dense not in thinned.snapshot_times
    bridged = reference_at(thinned, t_dense, 20).numpy()
    dense = restrict(problem.load_snapshot(problem.snapshot_paths[3]), 20)
    assert np.abs(bridged - dense).max() < 1e-8


def test_reference_at_beyond_final_time_raises(tiny_dataset):
    _, problems = load_manifest(tiny_dataset / "manifest.json")
    with pytest.raises(KeyError):
        reference_at(problems[0], problems[0].t_final * 1.5, 20)


def smoke_config(tiny_dataset, tiny_validation, out_dir, **overrides):
    kwargs = dict(
        manifest=str(tiny_dataset / "manifest.json"),
        validation_manifest=str(tiny_validation / "manifest.json"),
        out_dir=str(out_dir),
        coarse_grid=20,
        max_steps=30,
        validation_period=10,
        seed=4,
        init_scale=0.05,
    )
    kwargs.update(overrides)
    return TrainConfig(**kwargs)


def test_training_smoke_run(tiny_dataset, tiny_validation, tmp_path):
    log = train(smoke_config(tiny_dataset, tiny_validation, tmp_path / "run"),
                log_fn=lambda *_: None)
    assert len(log["losses"]) == 30
    assert all(np.isfinite(log["losses"]))
    assert log["validation_steps"] == [10, 20, 30]
    assert len(log["checkpoints"]) == 3
    assert log["best_checkpoint"] in log["checkpoints"]
    rescaled = np.asarray(log["validation_rescaled"])
    assert rescaled.shape == (1, 3)
    assert rescaled.max() == 1.0
    # checkpoints load back into the harness and into the solver package
    net = load_net(log["best_checkpoint"])
    assert net.arch_tag == "A"
    import wenods.cnn as solver_cnn
    solver_cnn.load_weights(log["best_checkpoint"])
    saved = json.loads((tmp_path / "run" / "validation_log.json").read_text())
    assert saved["selection"] == log["selection"]


def test_training_selection_is_reproducible(tiny_dataset, tiny_validation, tmp_path):
    log_a = train(smoke_config(tiny_dataset, tiny_validation, tmp_path / "a",
                               max_steps=15, validation_period=15),
                  log_fn=lambda *_: None)
    log_b = train(smoke_config(tiny_dataset, tiny_validation, tmp_path / "b",
                               max_steps=15, validation_period=15),
                  log_fn=lambda *_: None)
    assert log_a["selection"] == log_b["selection"]
    assert log_a["losses"] == log_b["losses"]


def test_training_degenerates_to_sequential_with_full_mixing(
        tiny_dataset, tiny_validation, tmp_path):
    # probability one and a pool capped at a single problem: each problem
    # runs to completion before the next one opens
    log = train(smoke_config(tiny_dataset, tiny_validation, tmp_path / "seq",
                             max_steps=25, validation_period=25,
                             new_problem_prob=1.0, max_open_problems=1),
                log_fn=lambda *_: None)
    # the pool never holds more than the single capped problem, so every
    # step continues it until it finishes: strictly sequential training
    assert max(log["pool_sizes"]) == 1


def test_training_pool_respects_capacity(tiny_dataset, tiny_validation, tmp_path):
    log = train(smoke_config(tiny_dataset, tiny_validation, tmp_path / "cap",
                             max_steps=40, validation_period=40,
                             new_problem_prob=1.0, max_open_problems=2),
                log_fn=lambda *_: None)
    assert max(log["pool_sizes"]) <= 2


def test_training_loss_decreases_on_average(tiny_dataset, tiny_validation, tmp_path):
    # short run, but the early/late loss averages should already order
    log = train(smoke_config(tiny_dataset, tiny_validation, tmp_path / "trend",
                             max_steps=60, validation_period=60, seed=1),
                log_fn=lambda *_: None)
    losses = np.asarray(log["losses"])
    assert losses[-20:].mean() < losses[:20].mean() * 1.5
