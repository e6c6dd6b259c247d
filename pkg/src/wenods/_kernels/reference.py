"""Pure-numpy line-sweep kernel.

Computes the WENO flux-difference tendency for a batch of 1D lines in one
vectorised pass: characteristic projection at every interface, global
Lax-Friedrichs splitting, optional CNN multipliers, nonlinear weights, and
back-projection.  The compiled kernel in ``_fast`` implements the same
arithmetic cell-by-cell; parity between the two is enforced in the tests.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .. import cnn as cnn_mod
from ..errors import MissingModel, NonPhysicalState
from ..euler import eigen_matrices

_D0, _D1, _D2 = 0.1, 0.6, 0.3

SCHEME_IDS = {"js": 0, "z": 1, "ds-js": 2, "ds-z": 3}


def _limit_normalise(a0, a1, a2):
    # eps = 0 can push alphas to infinity; the normalised weights then
    # concentrate on the infinite entries in proportion to the ideal weights.
    inf0, inf1, inf2 = np.isinf(a0), np.isinf(a1), np.isinf(a2)
    total = a0 + a1 + a2
    w0, w1, w2 = a0 / total, a1 / total, a2 / total
    anyinf = inf0 | inf1 | inf2
    if anyinf.any():
        l0 = np.where(inf0, _D0, 0.0)
        l1 = np.where(inf1, _D1, 0.0)
        l2 = np.where(inf2, _D2, 0.0)
        lsum = l0 + l1 + l2
        w0 = np.where(anyinf, l0 / np.where(anyinf, lsum, 1.0), w0)
        w1 = np.where(anyinf, l1 / np.where(anyinf, lsum, 1.0), w1)
        w2 = np.where(anyinf, l2 / np.where(anyinf, lsum, 1.0), w2)
    return w0, w1, w2


def _weights_js(b0, b1, b2, eps):
    with np.errstate(divide="ignore"):
        d0 = (eps + b0) * (eps + b0)
        d1 = (eps + b1) * (eps + b1)
        d2 = (eps + b2) * (eps + b2)
        a0 = np.where(d0 > 0.0, _D0 / np.where(d0 > 0.0, d0, 1.0), np.inf)
        a1 = np.where(d1 > 0.0, _D1 / np.where(d1 > 0.0, d1, 1.0), np.inf)
        a2 = np.where(d2 > 0.0, _D2 / np.where(d2 > 0.0, d2, 1.0), np.inf)
    return _limit_normalise(a0, a1, a2)


def _weights_z(b0, b1, b2, eps):
    tau = np.abs(b0 - b2)
    with np.errstate(divide="ignore", invalid="ignore"):
        r0 = _z_ratio(tau, b0 + eps)
        r1 = _z_ratio(tau, b1 + eps)
        r2 = _z_ratio(tau, b2 + eps)
    return _limit_normalise(_D0 * (1.0 + r0 * r0),
                            _D1 * (1.0 + r1 * r1),
                            _D2 * (1.0 + r2 * r2))


def _z_ratio(tau, den):
    r = tau / np.where(den > 0.0, den, 1.0)
    return np.where(den > 0.0, r, np.where(tau == 0.0, 0.0, np.inf))


def _interface_flux(fp, fm, e, scheme_id, eps, c_ds, dp, dm):
    """Both-sign WENO value per interface from split window values.

    ``fp``/``fm`` have shape (..., wlen) with the window covering cells
    i-2-e .. i+3+e; ``dp``/``dm`` hold the three multiplier values per sign.
    """
    a, b, c, d, ee = (fp[..., e + j] for j in range(5))
    c0 = (2.0 * a - 7.0 * b + 11.0 * c) / 6.0
    c1 = (-b + 5.0 * c + 2.0 * d) / 6.0
    c2 = (2.0 * c + 5.0 * d - ee) / 6.0
    b0 = 13.0 / 12.0 * (a - 2.0 * b + c) ** 2 + 0.25 * (a - 4.0 * b + 3.0 * c) ** 2
    b1 = 13.0 / 12.0 * (b - 2.0 * c + d) ** 2 + 0.25 * (b - d) ** 2
    b2 = 13.0 / 12.0 * (c - 2.0 * d + ee) ** 2 + 0.25 * (3.0 * c - 4.0 * d + ee) ** 2
    if scheme_id >= 2:
        b0 = b0 * (dp[..., 0] + c_ds)
        b1 = b1 * (dp[..., 1] + c_ds)
        b2 = b2 * (dp[..., 2] + c_ds)
    if scheme_id % 2 == 0:
        w0, w1, w2 = _weights_js(b0, b1, b2, eps)
    else:
        w0, w1, w2 = _weights_z(b0, b1, b2, eps)
    fhat = w0 * c0 + w1 * c1 + w2 * c2

    m1, m2, m3, m4, m5 = (fm[..., e + 1 + j] for j in range(5))
    c0 = (11.0 * m3 - 7.0 * m4 + 2.0 * m5) / 6.0
    c1 = (2.0 * m2 + 5.0 * m3 - m4) / 6.0
    c2 = (-m1 + 5.0 * m2 + 2.0 * m3) / 6.0
    b0 = 13.0 / 12.0 * (m3 - 2.0 * m4 + m5) ** 2 + 0.25 * (3.0 * m3 - 4.0 * m4 + m5) ** 2
    b1 = 13.0 / 12.0 * (m2 - 2.0 * m3 + m4) ** 2 + 0.25 * (m2 - m4) ** 2
    b2 = 13.0 / 12.0 * (m1 - 2.0 * m2 + m3) ** 2 + 0.25 * (m1 - 4.0 * m2 + 3.0 * m3) ** 2
    if scheme_id >= 2:
        b0 = b0 * (dm[..., 2] + c_ds)
        b1 = b1 * (dm[..., 1] + c_ds)
        b2 = b2 * (dm[..., 0] + c_ds)
    if scheme_id % 2 == 0:
        w0, w1, w2 = _weights_js(b0, b1, b2, eps)
    else:
        w0, w1, w2 = _weights_z(b0, b1, b2, eps)
    return fhat + w0 * c0 + w1 * c1 + w2 * c2


def sweep(lines, ghost, gamma, alpha, dxinv, scheme, eps, c_ds,
          model=None, capture=None):
    """Flux-difference tendency for a batch of lines.

    Parameters
    ----------
    lines : (nrows, n + 2*ghost, 4) float64
        Conserved states along the sweep direction, along-axis momentum in
        component 1 (callers swap components for the y sweep).
    ghost : int
        Ghost width; must be at least 3 (+ k-1 for deep-smoothness runs).
    alpha : float
        Global splitting speed for this direction.
    dxinv : float
        Reciprocal grid spacing; output is -(fhat_{i+1/2}-fhat_{i-1/2})*dxinv.
    scheme : str
        One of js, z, ds-js, ds-z.
    capture : dict, optional
        When given, the multiplier fields are stored under ``d_plus`` and
        ``d_minus`` (test hook).

    Returns
    -------
    (nrows, n, 4) tendency array for the interior cells.
    """
    u = np.asarray(lines, dtype=np.float64)
    nrows, m, _ = u.shape
    g = ghost
    n = m - 2 * g
    scheme_id = SCHEME_IDS[scheme]
    ds = scheme_id >= 2
    if ds and model is None:
        raise MissingModel(f"scheme {scheme!r} needs a CNN model")
    e = (model.k - 1) if ds else 0
    if g < 3 + e:
        raise ValueError(f"ghost width {g} too small for stencil halo {3 + e}")

    rho = u[..., 0]
    if not (rho > 0.0).all():
        raise NonPhysicalState("non-positive density on a sweep line")
    vel = u[..., 1] / rho
    vt = u[..., 2] / rho
    p = (gamma - 1.0) * (u[..., 3] - 0.5 * rho * (vel * vel + vt * vt))
    if not (p > 0.0).all():
        raise NonPhysicalState("non-positive pressure on a sweep line")
    flux = np.empty_like(u)
    flux[..., 0] = u[..., 1]
    flux[..., 1] = u[..., 1] * vel + p
    flux[..., 2] = u[..., 1] * vt
    flux[..., 3] = vel * (u[..., 3] + p)

    ii = np.arange(g - 1, g + n)
    qa = 0.5 * (u[:, ii, :] + u[:, ii + 1, :])
    rho_a = qa[..., 0]
    u_a = qa[..., 1] / rho_a
    v_a = qa[..., 2] / rho_a
    p_a = (gamma - 1.0) * (qa[..., 3] - 0.5 * rho_a * (u_a * u_a + v_a * v_a))
    if not ((rho_a > 0.0).all() and (p_a > 0.0).all()):
        raise NonPhysicalState("non-physical interface average state")
    c_a = np.sqrt(gamma * p_a / rho_a)
    h_a = (qa[..., 3] + p_a) / rho_a
    left, right = eigen_matrices(u_a, v_a, c_a, h_a, gamma)

    wlen = 6 + 2 * e
    starts = ii - 2 - e
    wq = sliding_window_view(u, wlen, axis=1)[:, starts]
    wf = sliding_window_view(flux, wlen, axis=1)[:, starts]
    cq = np.einsum("riab,ribw->riaw", left, wq)
    cf = np.einsum("riab,ribw->riaw", left, wf)
    fp = 0.5 * (cf + alpha * cq)
    fm = 0.5 * (cf - alpha * cq)

    dp = dm = None
    if ds:
        dp = cnn_mod.forward(model, fp[..., 0:5 + 2 * e])
        dm = cnn_mod.forward(model, fm[..., 1:6 + 2 * e])
    if capture is not None:
        capture["split_plus"] = fp.copy()
        capture["split_minus"] = fm.copy()
        capture["d_plus"] = dp
        capture["d_minus"] = dm

    char_flux = _interface_flux(fp, fm, e, scheme_id, eps, c_ds, dp, dm)
    fhat = np.einsum("riab,rib->ria", right, char_flux)
    return -dxinv * (fhat[:, 1:, :] - fhat[:, :-1, :])
