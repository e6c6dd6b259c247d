"""Differentiable WENO solver on 2D Euler, mirroring the solver package.

Everything runs in float64 torch so one time step agrees with the
production engine to rounding noise, while staying differentiable with
respect to the multiplier network's parameters (including the adaptive
activation parameters).  The time-step size itself is treated as data, not
differentiated through.
"""

from __future__ import annotations

import numpy as np
import torch

D0, D1, D2 = 0.1, 0.6, 0.3
CFL = 0.6


class BlowUp(RuntimeError):
    """The integration left the physical state space."""


def primitives(q, gamma):
    rho = q[..., 0]
    u = q[..., 1] / rho
    v = q[..., 2] / rho
    p = (gamma - 1.0) * (q[..., 3] - 0.5 * rho * (u * u + v * v))
    return rho, u, v, p


def check_physical(q, gamma):
    rho, _, _, p = primitives(q, gamma)
    if not torch.isfinite(q).all() or (rho <= 0).any() or (p <= 0).any():
        raise BlowUp("non-physical state")


def max_wave_speed(q, gamma) -> float:
    # feeds the step size, which is data: computed from the pre-step state
    rho, u, v, p = primitives(q.detach(), gamma)
    c = torch.sqrt(gamma * p / rho)
    return float((torch.sqrt(u * u + v * v) + c).max())


def axis_wave_speed(q, gamma, axis: int):
    """Splitting speed max(|u_axis| + c); a 0-dim tensor.

    Later stages evaluate it on states that depend on the network, so it
    stays on the autograd tape (the loss genuinely varies through it).
    """
    rho, u, v, p = primitives(q, gamma)
    c = torch.sqrt(gamma * p / rho)
    vel = u if axis == 0 else v
    return (vel.abs() + c).max()


def stable_dt(q, gamma, dx: float, dy: float) -> float:
    return CFL * min(dx, dy) / max_wave_speed(q, gamma)


def _line_flux(u, gamma):
    rho = u[..., 0]
    vel = u[..., 1] / rho
    vt = u[..., 2] / rho
    p = (gamma - 1.0) * (u[..., 3] - 0.5 * rho * (vel * vel + vt * vt))
    return torch.stack([u[..., 1], u[..., 1] * vel + p, u[..., 1] * vt,
                        vel * (u[..., 3] + p)], dim=-1)


def _eigen_matrices(qa, gamma):
    rho = qa[..., 0]
    uu = qa[..., 1] / rho
    vv = qa[..., 2] / rho
    p = (gamma - 1.0) * (qa[..., 3] - 0.5 * rho * (uu * uu + vv * vv))
    c = torch.sqrt(gamma * p / rho)
    enth = (qa[..., 3] + p) / rho
    b2 = (gamma - 1.0) / (c * c)
    q2h = 0.5 * (uu * uu + vv * vv)
    b1 = b2 * q2h
    cinv = 1.0 / c
    zero = torch.zeros_like(rho)
    one = torch.ones_like(rho)

    right = torch.stack([
        torch.stack([one, one, zero, one], dim=-1),
        torch.stack([uu - c, uu, zero, uu + c], dim=-1),
        torch.stack([vv, vv, one, vv], dim=-1),
        torch.stack([enth - uu * c, q2h, vv, enth + uu * c], dim=-1),
    ], dim=-2)
    left = torch.stack([
        torch.stack([0.5 * (b1 + uu * cinv), -0.5 * (b2 * uu + cinv),
                     -0.5 * b2 * vv, 0.5 * b2], dim=-1),
        torch.stack([1.0 - b1, b2 * uu, b2 * vv, -b2], dim=-1),
        torch.stack([-vv, zero, one, zero], dim=-1),
        torch.stack([0.5 * (b1 - uu * cinv), -0.5 * (b2 * uu - cinv),
                     -0.5 * b2 * vv, 0.5 * b2], dim=-1),
    ], dim=-2)
    return left, right


def _limit_normalise(a0, a1, a2):
    inf0, inf1, inf2 = torch.isinf(a0), torch.isinf(a1), torch.isinf(a2)
    anyinf = inf0 | inf1 | inf2
    total = a0 + a1 + a2
    safe = torch.where(anyinf, torch.ones_like(total), total)
    w0, w1, w2 = a0 / safe, a1 / safe, a2 / safe
    if bool(anyinf.any()):
        l0 = torch.where(inf0, torch.full_like(a0, D0), torch.zeros_like(a0))
        l1 = torch.where(inf1, torch.full_like(a1, D1), torch.zeros_like(a1))
        l2 = torch.where(inf2, torch.full_like(a2, D2), torch.zeros_like(a2))
        lsum = torch.where(anyinf, l0 + l1 + l2, torch.ones_like(a0))
        w0 = torch.where(anyinf, l0 / lsum, w0)
        w1 = torch.where(anyinf, l1 / lsum, w1)
        w2 = torch.where(anyinf, l2 / lsum, w2)
    return w0, w1, w2


def _weights_js(b0, b1, b2, eps):
    inf = torch.tensor(float("inf"), dtype=b0.dtype)

    def alpha(d, b):
        den = (eps + b) * (eps + b)
        safe = torch.where(den > 0, den, torch.ones_like(den))
        return torch.where(den > 0, d / safe, inf)

    return _limit_normalise(alpha(D0, b0), alpha(D1, b1), alpha(D2, b2))


def _weights_z(b0, b1, b2, eps):
    tau = (b0 - b2).abs()
    inf = torch.tensor(float("inf"), dtype=b0.dtype)

    def ratio(b):
        den = b + eps
        safe = torch.where(den > 0, den, torch.ones_like(den))
        r = tau / safe
        return torch.where(den > 0, r,
                           torch.where(tau == 0, torch.zeros_like(r), inf))

    r0, r1, r2 = ratio(b0), ratio(b1), ratio(b2)
    return _limit_normalise(D0 * (1 + r0 * r0), D1 * (1 + r1 * r1),
                            D2 * (1 + r2 * r2))


def _one_sign(vals, d_vals, zform, eps, c_ds, minus):
    """WENO value per interface for one split sign.

    ``vals``: (..., 5) stencil values; ``d_vals``: (..., 3) multipliers or
    None; the minus sign uses the mirrored formulas and multiplier order.
    """
    a, b, c, d, e = (vals[..., j] for j in range(5))
    if not minus:
        c0 = (2 * a - 7 * b + 11 * c) / 6
        c1 = (-b + 5 * c + 2 * d) / 6
        c2 = (2 * c + 5 * d - e) / 6
        b0 = 13 / 12 * (a - 2 * b + c) ** 2 + 0.25 * (a - 4 * b + 3 * c) ** 2
        b1 = 13 / 12 * (b - 2 * c + d) ** 2 + 0.25 * (b - d) ** 2
        b2 = 13 / 12 * (c - 2 * d + e) ** 2 + 0.25 * (3 * c - 4 * d + e) ** 2
    else:
        c0 = (11 * c - 7 * d + 2 * e) / 6
        c1 = (2 * b + 5 * c - d) / 6
        c2 = (-a + 5 * b + 2 * c) / 6
        b0 = 13 / 12 * (c - 2 * d + e) ** 2 + 0.25 * (3 * c - 4 * d + e) ** 2
        b1 = 13 / 12 * (b - 2 * c + d) ** 2 + 0.25 * (b - d) ** 2
        b2 = 13 / 12 * (a - 2 * b + c) ** 2 + 0.25 * (a - 4 * b + 3 * c) ** 2
    if d_vals is not None:
        if not minus:
            b0 = b0 * (d_vals[..., 0] + c_ds)
            b1 = b1 * (d_vals[..., 1] + c_ds)
            b2 = b2 * (d_vals[..., 2] + c_ds)
        else:
            b0 = b0 * (d_vals[..., 2] + c_ds)
            b1 = b1 * (d_vals[..., 1] + c_ds)
            b2 = b2 * (d_vals[..., 0] + c_ds)
    w0, w1, w2 = (_weights_z if zform else _weights_js)(b0, b1, b2, eps)
    return w0 * c0 + w1 * c1 + w2 * c2


def sweep(lines, ghost, gamma, alpha, dxinv, model=None, zform=True,
          eps=1e-6, c_ds=0.1):
    """Flux-difference tendency for a batch of lines (torch mirror).

    ``lines``: (rows, n + 2*ghost, 4) with along-axis momentum in component
    1.  ``model`` switches on the deep-smoothness multipliers.
    """
    u = lines
    rows, m, _ = u.shape
    e = (model.k - 1) if model is not None else 0
    g = ghost
    n = m - 2 * g
    flux = _line_flux(u, gamma)

    qa = 0.5 * (u[:, g - 1:g + n] + u[:, g:g + n + 1])
    left, right = _eigen_matrices(qa, gamma)

    wlen = 6 + 2 * e
    wq = u.unfold(1, wlen, 1)[:, g - 3 - e:g - 2 - e + n]
    wf = flux.unfold(1, wlen, 1)[:, g - 3 - e:g - 2 - e + n]
    cq = torch.einsum("riab,ribw->riaw", left, wq)
    cf = torch.einsum("riab,ribw->riaw", left, wf)
    fp = 0.5 * (cf + alpha * cq)
    fm = 0.5 * (cf - alpha * cq)

    dp = dm = None
    if model is not None:
        width = 3 + 2 * model.k
        batch_p = fp[..., 0:width].reshape(-1, 4, width)
        batch_m = fm[..., 1:width + 1].reshape(-1, 4, width)
        dp = model(batch_p).reshape(rows, n + 1, 4, 3)
        dm = model(batch_m).reshape(rows, n + 1, 4, 3)

    fhat_char = (_one_sign(fp[..., e:e + 5], dp, zform, eps, c_ds, minus=False)
                 + _one_sign(fm[..., e + 1:e + 6], dm, zform, eps, c_ds, minus=True))
    fhat = torch.einsum("riab,rib->ria", right, fhat_char)
    return -dxinv * (fhat[:, 1:] - fhat[:, :-1])


def _pad_replicate(q, g):
    top = q[:1].expand(g, -1, -1)
    bottom = q[-1:].expand(g, -1, -1)
    q = torch.cat([top, q, bottom], dim=0)
    leftc = q[:, :1].expand(-1, g, -1)
    rightc = q[:, -1:].expand(-1, g, -1)
    return torch.cat([leftc, q, rightc], dim=1)


def tendency(q, gamma, model=None, zform=True, eps=1e-6, c_ds=0.1):
    """-dF/dx - dG/dy on the interior, replicate ghost cells."""
    n_x, n_y = q.shape[0], q.shape[1]
    g = 3 + (max(0, model.k - 1) if model is not None else 0)
    padded = _pad_replicate(q, g)

    alpha_x = axis_wave_speed(q, gamma, 0)
    lines_x = padded[:, g:g + n_y].permute(1, 0, 2)
    lx = sweep(lines_x, g, gamma, alpha_x, float(n_x), model=model,
               zform=zform, eps=eps, c_ds=c_ds).permute(1, 0, 2)

    alpha_y = axis_wave_speed(q, gamma, 1)
    lines_y = padded[g:g + n_x][..., [0, 2, 1, 3]]
    ly = sweep(lines_y, g, gamma, alpha_y, float(n_y), model=model,
               zform=zform, eps=eps, c_ds=c_ds)[..., [0, 2, 1, 3]]
    return lx + ly


def rk3_step(q, dt, gamma, model=None, zform=True, eps=1e-6, c_ds=0.1):
    """One strong-stability-preserving step of size dt."""
    def rhs(state):
        return tendency(state, gamma, model=model, zform=zform, eps=eps, c_ds=c_ds)

    u1 = q + dt * rhs(q)
    u2 = 0.75 * q + 0.25 * u1 + 0.25 * dt * rhs(u1)
    return q / 3.0 + (2.0 / 3.0) * u2 + (2.0 / 3.0) * dt * rhs(u2)


def advance_to(q, gamma, t_start, t_end, dx, dy, model=None, zform=True,
               eps=1e-6, c_ds=0.1):
    """Integrate with adaptive steps from t_start to exactly t_end (no grad)."""
    t = t_start
    with torch.no_grad():
        while t < t_end * (1 - 1e-15):
            dt = stable_dt(q, gamma, dx, dy)
            remaining = t_end - t
            if dt >= remaining * (1 - 1e-12):
                dt = remaining
                t = t_end
            else:
                t += dt
            q = rk3_step(q, dt, gamma, model=model, zform=zform, eps=eps, c_ds=c_ds)
            check_physical(q, gamma)
    return q
