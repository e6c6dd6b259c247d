"""Fifth-order WENO solvers for 2D Euler Riemann problems.

Implements the classic and tau5-weighted schemes plus their deep-smoothness
variants, where a small CNN rescales the smoothness indicators.  Ships a
compiled sweep kernel with a pure-numpy fallback, Riemann-configuration
samplers, reference-solution tooling and L1/ratio evaluation.
"""

from ._kernels import active_backend, available_backends, use_backend
from .euler import GasModel
from .riemann import RiemannSpec, builtin_ic, sample_spec
from .solver import FieldGrid, SchemeConfig, make_reference, restrict, rhs, rk3_step, run

__version__ = "0.1.0"

__all__ = [
    "GasModel",
    "RiemannSpec",
    "FieldGrid",
    "SchemeConfig",
    "active_backend",
    "available_backends",
    "builtin_ic",
    "make_reference",
    "restrict",
    "rhs",
    "rk3_step",
    "run",
    "sample_spec",
    "use_backend",
    "__version__",
]
