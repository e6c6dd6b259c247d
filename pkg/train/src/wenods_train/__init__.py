"""Differentiable training harness for CNN-adjusted WENO smoothness indicators.

Consumes dataset manifests and snapshot files produced by the solver
package's CLI, trains the multiplier network against restricted fine-grid
references, and exports weight files in the shared JSON format.
"""

from .model import MultiplierNet, export_weights, load_weights, zero_net
from .solver import BlowUp, rk3_step, stable_dt, tendency
from .training import TrainConfig, differentiable_step, reference_at, train

__version__ = "0.1.0"

__all__ = [
    "BlowUp",
    "MultiplierNet",
    "TrainConfig",
    "differentiable_step",
    "export_weights",
    "load_weights",
    "reference_at",
    "rk3_step",
    "stable_dt",
    "tendency",
    "train",
    "zero_net",
]
