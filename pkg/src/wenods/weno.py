"""Scalar fifth-order WENO reconstruction kernels.

These are the reference kernels: plain, stencil-at-a-time evaluation of the
candidate fluxes, smoothness indicators, nonlinear weights (classic and
tau5-based), and optional deep-smoothness multipliers.  The grid sweeps in
``wenods._kernels`` reimplement the same arithmetic vectorised/compiled; the
test suite holds the two routes against each other.

Stencil conventions for the interface at i+1/2:

* plus-sign values cover cells i-2 .. i+2 (5 entries),
* minus-sign values cover cells i-1 .. i+3 (5 entries),
* multiplier fields are attached to substencil centre cells, so the plus
  reconstruction reads cells i-1, i, i+1 and the minus one cells i, i+1, i+2.
"""

from __future__ import annotations

import numpy as np

from .errors import NonPositiveMultiplier

#: ideal (linear) weights of the three candidate substencils
D_IDEAL = np.array([0.1, 0.6, 0.3])

#: default regularisation of the nonlinear-weight denominators
EPS_DEFAULT = 1e-6

#: default additive constant under the deep-smoothness multipliers
C_DEFAULT = 0.1

SCHEMES = ("js", "z", "ds-js", "ds-z")


def lax_friedrichs_split(f, u, alpha):
    """Split flux values into (f + alpha*u)/2 and (f - alpha*u)/2.

    ``alpha`` must dominate |f'(u)| on the data for the split parts to be
    monotone; the two parts always sum back to ``f`` exactly.
    """
    f = np.asarray(f, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    au = alpha * u
    return 0.5 * (f + au), 0.5 * (f - au)


def candidate_fluxes_plus(f5):
    """Third-order candidate values at i+1/2 from cells i-2 .. i+2."""
    a, b, c, d, e = f5
    return np.array([
        (2.0 * a - 7.0 * b + 11.0 * c) / 6.0,
        (-b + 5.0 * c + 2.0 * d) / 6.0,
        (2.0 * c + 5.0 * d - e) / 6.0,
    ])


def candidate_fluxes_minus(f5):
    """Candidate values at i+1/2 for the minus split, cells i-1 .. i+3.

    Mirror image of the plus kernel: evaluating the plus formulas on the
    reversed stencil yields the same three values in the same order.
    """
    a, b, c, d, e = f5
    return np.array([
        (11.0 * c - 7.0 * d + 2.0 * e) / 6.0,
        (2.0 * b + 5.0 * c - d) / 6.0,
        (-a + 5.0 * b + 2.0 * c) / 6.0,
    ])


def beta_plus(f5):
    """Smoothness indicators for the plus stencil (cells i-2 .. i+2)."""
    a, b, c, d, e = f5
    return np.array([
        13.0 / 12.0 * (a - 2.0 * b + c) ** 2 + 0.25 * (a - 4.0 * b + 3.0 * c) ** 2,
        13.0 / 12.0 * (b - 2.0 * c + d) ** 2 + 0.25 * (b - d) ** 2,
        13.0 / 12.0 * (c - 2.0 * d + e) ** 2 + 0.25 * (3.0 * c - 4.0 * d + e) ** 2,
    ])


def beta_minus(f5):
    """Smoothness indicators for the minus stencil (cells i-1 .. i+3)."""
    a, b, c, d, e = f5
    return np.array([
        13.0 / 12.0 * (c - 2.0 * d + e) ** 2 + 0.25 * (3.0 * c - 4.0 * d + e) ** 2,
        13.0 / 12.0 * (b - 2.0 * c + d) ** 2 + 0.25 * (b - d) ** 2,
        13.0 / 12.0 * (a - 2.0 * b + c) ** 2 + 0.25 * (a - 4.0 * b + 3.0 * c) ** 2,
    ])


def _limit_weights(alphas):
    # A zero denominator with eps = 0 drives its alpha to infinity; the
    # normalised weights then concentrate on the infinite set in proportion
    # to the ideal weights (the eps -> 0+ limit of the formulas).
    inf = np.isinf(alphas)
    if inf.any():
        w = np.where(inf, D_IDEAL, 0.0)
        return w / w.sum()
    return alphas / alphas.sum()


def weights_js(beta, eps: float = EPS_DEFAULT):
    """Classic nonlinear weights d_m / (eps + beta_m)^2, normalised."""
    beta = np.asarray(beta, dtype=np.float64)
    denom = (eps + beta) ** 2
    with np.errstate(divide="ignore"):
        alphas = np.where(denom > 0.0, D_IDEAL / np.where(denom > 0.0, denom, 1.0), np.inf)
    return _limit_weights(alphas)


def weights_z(beta, eps: float = EPS_DEFAULT):
    """tau5-based weights d_m [1 + (tau5 / (beta_m + eps))^2], normalised."""
    beta = np.asarray(beta, dtype=np.float64)
    tau5 = abs(beta[0] - beta[2])
    denom = beta + eps
    with np.errstate(divide="ignore"):
        ratio = np.where(denom > 0.0, tau5 / np.where(denom > 0.0, denom, 1.0),
                         0.0 if tau5 == 0.0 else np.inf)
    alphas = D_IDEAL * (1.0 + ratio * ratio)
    return _limit_weights(alphas)


def apply_ds_multipliers(beta, d_window, c: float = C_DEFAULT, sign: str = "plus"):
    """Scale indicators by (delta_m + c) with substencil-attached multipliers.

    ``d_window`` holds the per-cell multiplier values at the three substencil
    centre cells in increasing cell order: cells i-1, i, i+1 for the plus
    sign and cells i, i+1, i+2 for the minus sign.  Because each value is
    attached to a cell, the same multiplier reappears under the neighbouring
    interfaces, which is what keeps the scheme conservative.
    """
    beta = np.asarray(beta, dtype=np.float64)
    d_window = np.asarray(d_window, dtype=np.float64)
    if not (d_window > 0.0).all():
        raise NonPositiveMultiplier(f"multipliers must be positive, got {d_window}")
    if sign == "plus":
        delta = d_window
    elif sign == "minus":
        delta = d_window[::-1]
    else:
        raise ValueError(f"sign must be 'plus' or 'minus', got {sign!r}")
    return beta * (delta + c)


def _weights_for(scheme, beta, eps):
    if scheme in ("js", "ds-js"):
        return weights_js(beta, eps)
    if scheme in ("z", "ds-z"):
        return weights_z(beta, eps)
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def reconstruct_interface(f5plus, f5minus, scheme: str = "z",
                          eps: float = EPS_DEFAULT,
                          d_plus=None, d_minus=None, c: float = C_DEFAULT) -> float:
    """Interface flux at i+1/2: weighted candidates summed over both signs.

    For the deep-smoothness schemes, ``d_plus``/``d_minus`` carry the
    multiplier windows described in :func:`apply_ds_multipliers`; the
    tau5 of the z-form weights is computed from the modified indicators.
    """
    bp = beta_plus(f5plus)
    bm = beta_minus(f5minus)
    if scheme.startswith("ds-"):
        if d_plus is None or d_minus is None:
            raise ValueError("deep-smoothness schemes need multiplier windows")
        bp = apply_ds_multipliers(bp, d_plus, c, "plus")
        bm = apply_ds_multipliers(bm, d_minus, c, "minus")
    wp = _weights_for(scheme, bp, eps)
    wm = _weights_for(scheme, bm, eps)
    return float(wp @ candidate_fluxes_plus(f5plus) + wm @ candidate_fluxes_minus(f5minus))
