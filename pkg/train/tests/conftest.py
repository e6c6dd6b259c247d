import numpy as np
import pytest
import torch

torch.set_num_threads(1)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def run_solver_cli(*argv):
    """Invoke the solver package's command line (its external interface)."""
    from wenods.cli import main
    return main([str(a) for a in argv])


@pytest.fixture(scope="session")
def tiny_dataset(tmp_path_factory):
    """Three four-shock problems with every-step 40x40 references."""
    out = tmp_path_factory.mktemp("dataset")
    code = run_solver_cli("generate", "--config-tag", 3, "--count", 3,
                          "--seed", 5, "--fine-grid", 40, "--out", out)
    assert code == 0
    return out


@pytest.fixture(scope="session")
def tiny_validation(tmp_path_factory):
    out = tmp_path_factory.mktemp("validation")
    code = run_solver_cli("generate", "--config-tag", 3, "--count", 1,
                          "--seed", 99, "--fine-grid", 40, "--out", out)
    assert code == 0
    return out
