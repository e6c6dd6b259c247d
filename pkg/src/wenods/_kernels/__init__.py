"""Sweep-kernel backends.

The compiled extension is preferred when it imported cleanly; the numpy
implementation is the always-available fallback.  ``WENODS_KERNELS`` forces
a choice ("fast" or "reference").
"""

from __future__ import annotations

import os

from . import reference

try:
    from . import _fast
except ImportError:
    _fast = None

_BACKENDS = {"reference": reference}
if _fast is not None:
    _BACKENDS["fast"] = _fast


def _initial_choice() -> str:
    wanted = os.environ.get("WENODS_KERNELS", "")
    if wanted:
        if wanted not in _BACKENDS:
            raise ImportError(
                f"WENODS_KERNELS={wanted!r} but available backends are "
                f"{sorted(_BACKENDS)}")
        return wanted
    return "fast" if _fast is not None else "reference"


_active_name = _initial_choice()


def active_backend() -> str:
    return _active_name


def available_backends():
    return sorted(_BACKENDS)


def use_backend(name: str):
    """Switch the backend the solver dispatches to (tests, benchmarks)."""
    global _active_name
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; have {sorted(_BACKENDS)}")
    _active_name = name


def sweep(*args, **kwargs):
    return _BACKENDS[_active_name].sweep(*args, **kwargs)
