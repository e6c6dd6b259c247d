"""Four-quadrant Riemann initial data: wave relations, samplers, built-ins.

A quadrant spec stores the primitive states (rho, u, v, p) of quadrants
1..4, numbered counterclockwise from the upper-right quarter of the unit
square (quadrant 1 is x > 0.5, y > 0.5).  Generators for the
four-rarefaction (tag 2), four-shock (tag 3) and mixed (tag 16)
configurations draw initial data that satisfy the corresponding wave
relations exactly; :func:`verify_relations` reports the residuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidWaveData, RejectSample, UnknownConfiguration, UnknownName

_RHO, _U, _V, _P = 0, 1, 2, 3

#: configuration tags with generator/relation support
SUPPORTED_TAGS = (2, 3, 16)


@dataclass(frozen=True)
class RiemannSpec:
    """Quadrant states (rows 1..4), gas constant, final time and tag."""

    states: np.ndarray
    gamma: float
    t_final: float
    config_tag: int = 0

    def __post_init__(self):
        states = np.asarray(self.states, dtype=np.float64)
        if states.shape != (4, 4):
            raise ValueError(f"need 4 quadrant states of 4 values, got {states.shape}")
        object.__setattr__(self, "states", states)
        if not ((states[:, _RHO] > 0).all() and (states[:, _P] > 0).all()):
            raise ValueError("quadrant states must have positive density and pressure")

    def quadrant(self, number: int) -> np.ndarray:
        return self.states[number - 1]

    def to_dict(self) -> dict:
        return {
            "config_tag": int(self.config_tag),
            "gamma": float(self.gamma),
            "t_final": float(self.t_final),
            "quadrants": [[float(x) for x in row] for row in self.states],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RiemannSpec":
        return cls(states=np.asarray(doc["quadrants"], dtype=np.float64),
                   gamma=float(doc["gamma"]), t_final=float(doc["t_final"]),
                   config_tag=int(doc.get("config_tag", 0)))


def _mu(gamma: float) -> float:
    return (gamma - 1.0) / (gamma + 1.0)


def rarefaction_velocity_jump(left, right, gamma: float) -> float:
    """Velocity difference carried by a rarefaction between two states."""
    return (2.0 * math.sqrt(gamma) / (gamma - 1.0)) * (
        math.sqrt(left[_P] / left[_RHO]) - math.sqrt(right[_P] / right[_RHO]))


def shock_velocity_jump(left, right) -> float:
    """Positive velocity difference carried by a shock between two states."""
    radicand = (left[_P] - right[_P]) * (left[_RHO] - right[_RHO]) / (left[_RHO] * right[_RHO])
    if not radicand > 0.0:
        raise InvalidWaveData(
            f"shock relation needs (p_l-p_r)(rho_l-rho_r) > 0, radicand {radicand}")
    return math.sqrt(radicand)


def shock_density_ratio(left, right, gamma: float) -> float:
    """Density ratio rho_l/rho_r implied by the pressure ratio across a shock."""
    mu = _mu(gamma)
    pr = left[_P] / right[_P]
    return (pr + mu) / (1.0 + mu * pr)


def _rarefaction_residuals(spec, pairs):
    out = {}
    for (l, r) in pairs:
        wl, wr = spec.quadrant(l), spec.quadrant(r)
        out[f"poly_R{l}{r}"] = wl[_RHO] / wr[_RHO] - (wl[_P] / wr[_P]) ** (1.0 / spec.gamma)
    return out


def _shock_residuals(spec, pairs):
    out = {}
    for (l, r) in pairs:
        wl, wr = spec.quadrant(l), spec.quadrant(r)
        out[f"poly_S{l}{r}"] = wl[_RHO] / wr[_RHO] - shock_density_ratio(wl, wr, spec.gamma)
    return out


def verify_relations(spec: RiemannSpec) -> dict:
    """Absolute residuals of every wave relation the configuration imposes.

    The caller judges pass/fail: generated data should sit at ~1e-12, the
    published test constants (4 rounded digits) at ~1e-3.
    """
    w1, w2, w3, w4 = (spec.quadrant(i) for i in (1, 2, 3, 4))
    g = spec.gamma
    if spec.config_tag == 2:
        res = {
            "u21": (w2[_U] - w1[_U]) - rarefaction_velocity_jump(w2, w1, g),
            "u43": (w4[_U] - w3[_U]) - rarefaction_velocity_jump(w3, w4, g),
            "u32": w3[_U] - w2[_U],
            "u41": w4[_U] - w1[_U],
            "v41": (w4[_V] - w1[_V]) - rarefaction_velocity_jump(w4, w1, g),
            "v23": (w2[_V] - w3[_V]) - rarefaction_velocity_jump(w3, w2, g),
            "v21": w2[_V] - w1[_V],
            "v34": w3[_V] - w4[_V],
            "rho24": w2[_RHO] - w4[_RHO],
            "rho13": w1[_RHO] - w3[_RHO],
            "p13": w1[_P] - w3[_P],
            "p24": w2[_P] - w4[_P],
        }
        res.update(_rarefaction_residuals(spec, [(2, 1), (3, 4), (3, 2), (4, 1)]))
        return res
    if spec.config_tag == 3:
        res = {
            "u21": (w2[_U] - w1[_U]) - shock_velocity_jump(w2, w1),
            "u34": (w3[_U] - w4[_U]) - shock_velocity_jump(w3, w4),
            "u32": w3[_U] - w2[_U],
            "u41": w4[_U] - w1[_U],
            "v41": (w4[_V] - w1[_V]) - shock_velocity_jump(w4, w1),
            "v32": (w3[_V] - w2[_V]) - shock_velocity_jump(w3, w2),
            "v21": w2[_V] - w1[_V],
            "v34": w3[_V] - w4[_V],
            "rho24": w2[_RHO] - w4[_RHO],
            "p24": w2[_P] - w4[_P],
        }
        res.update(_shock_residuals(spec, [(2, 1), (3, 4), (3, 2), (4, 1)]))
        return res
    if spec.config_tag == 16:
        res = {
            "u12": (w1[_U] - w2[_U]) - rarefaction_velocity_jump(w2, w1, g),
            "u31": w3[_U] - w1[_U],
            "u41": w4[_U] - w1[_U],
            "v41": (w4[_V] - w1[_V]) - shock_velocity_jump(w4, w1),
            "v31": w3[_V] - w1[_V],
            "v21": w2[_V] - w1[_V],
            "p23": w2[_P] - w3[_P],
            "p24": w2[_P] - w4[_P],
            "p_order": max(0.0, w1[_P] - w2[_P]),
        }
        res.update(_rarefaction_residuals(spec, [(2, 1)]))
        res.update(_shock_residuals(spec, [(4, 1)]))
        return res
    raise UnknownConfiguration(
        f"no relation set for configuration {spec.config_tag}; have {SUPPORTED_TAGS}")


def max_residual(spec: RiemannSpec) -> float:
    return max(abs(v) for v in verify_relations(spec).values())


# --- samplers --------------------------------------------------------------

def _uniform(rng, lo, hi):
    return float(rng.uniform(lo, hi))


def try_sample_config2(rng: np.random.Generator) -> RiemannSpec:
    """One draw of four-rarefaction initial data; raises RejectSample."""
    gamma = _uniform(rng, 1.1, 1.67)
    rho1 = _uniform(rng, 0.7, 2.0)
    rho2 = _uniform(rng, 0.5, rho1)
    p1 = _uniform(rng, 0.2, 1.5)
    u1 = _uniform(rng, -1.0, 1.0)
    v1 = u1
    t_final = _uniform(rng, 0.1, 0.2)

    p2 = p1 * (rho2 / rho1) ** gamma
    w1 = np.array([rho1, u1, v1, p1])
    jump = rarefaction_velocity_jump(np.array([rho2, 0, 0, p2]), w1, gamma)
    u2 = u1 + jump
    v4 = v1 + jump
    w2 = np.array([rho2, u2, v1, p2])
    w3 = np.array([rho1, u2, v4, p1])
    w4 = np.array([rho2, u1, v4, p2])
    try:
        return RiemannSpec(states=np.stack([w1, w2, w3, w4]), gamma=gamma,
                           t_final=t_final, config_tag=2)
    except ValueError as exc:
        raise RejectSample(str(exc)) from exc


def _solve_config3_low_state(rho2: float, p2: float, target_jump: float,
                             gamma: float):
    """Pressure/density of the low quadrant-3 state behind both shocks.

    Solves shock_velocity_jump(w3, w2) = target on p3 in (0, p2) with
    rho3 = rho2 * shock_density_ratio, by bisection (the jump decreases
    monotonically to zero as p3 -> p2).
    """
    mu = _mu(gamma)

    def jump_of(p3):
        rho3 = rho2 * (p3 / p2 + mu) / (1.0 + mu * p3 / p2)
        return math.sqrt((p3 - p2) * (rho3 - rho2) / (rho3 * rho2))

    lo = p2 * 1e-9
    hi = p2 * (1.0 - 1e-9)
    g_lo = jump_of(lo) - target_jump
    g_hi = jump_of(hi) - target_jump
    if not (g_lo > 0.0 > g_hi):
        raise RejectSample(
            f"no bracketed root for the quadrant-3 pressure: g({lo})={g_lo}, g({hi})={g_hi}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if jump_of(mid) - target_jump > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    p3 = 0.5 * (lo + hi)
    rho3 = rho2 * (p3 / p2 + mu) / (1.0 + mu * p3 / p2)
    return rho3, p3


def try_sample_config3(rng: np.random.Generator) -> RiemannSpec:
    """One draw of four-shock initial data; raises RejectSample."""
    gamma = _uniform(rng, 1.1, 1.67)
    mu = _mu(gamma)
    rho1 = _uniform(rng, 1.0, 2.0)
    rho2 = _uniform(rng, 0.5, 1.0)
    p1 = _uniform(rng, 1.0, 2.0)
    u1 = _uniform(rng, -0.25, 0.25)
    v1 = u1
    t_final = _uniform(rng, 0.1, 0.3)

    r = rho2 / rho1
    if r <= mu:
        raise RejectSample(f"density ratio {r} below the shock limit {mu}")
    p2 = p1 * (r - mu) / (1.0 - mu * r)
    w1 = np.array([rho1, u1, v1, p1])
    w2_partial = np.array([rho2, 0, 0, p2])
    jump21 = shock_velocity_jump(w2_partial, w1)
    rho3, p3 = _solve_config3_low_state(rho2, p2, jump21, gamma)

    u2 = u1 + jump21
    v4 = v1 + jump21
    w2 = np.array([rho2, u2, v1, p2])
    w3 = np.array([rho3, u2, v4, p3])
    w4 = np.array([rho2, u1, v4, p2])
    try:
        return RiemannSpec(states=np.stack([w1, w2, w3, w4]), gamma=gamma,
                           t_final=t_final, config_tag=3)
    except ValueError as exc:
        raise RejectSample(str(exc)) from exc


def try_sample_config16(rng: np.random.Generator) -> RiemannSpec:
    """One draw of rarefaction/contacts/shock initial data; raises RejectSample."""
    gamma = _uniform(rng, 1.1, 1.67)
    rho4 = _uniform(rng, 1.0, 2.0)
    rho3 = _uniform(rng, 0.5, rho4)
    p1 = _uniform(rng, 0.3, 1.0)
    p2 = _uniform(rng, 1.0, 1.5)
    u1 = _uniform(rng, -0.25, 0.25)
    v1 = u1
    t_final = _uniform(rng, 0.1, 0.2)

    if not p2 > p1:
        raise RejectSample(f"need p1 < p2, got {p1} vs {p2}")
    p3 = p4 = p2
    rho1 = rho4 / shock_density_ratio(np.array([0, 0, 0, p4]), np.array([0, 0, 0, p1]), gamma)
    rho2 = rho1 * (p2 / p1) ** (1.0 / gamma)
    w1 = np.array([rho1, u1, v1, p1])
    w4_partial = np.array([rho4, 0, 0, p4])
    u2 = u1 - rarefaction_velocity_jump(np.array([rho2, 0, 0, p2]), w1, gamma)
    v4 = v1 + shock_velocity_jump(w4_partial, w1)
    w2 = np.array([rho2, u2, v1, p2])
    w3 = np.array([rho3, u1, v1, p3])
    w4 = np.array([rho4, u1, v4, p4])
    try:
        return RiemannSpec(states=np.stack([w1, w2, w3, w4]), gamma=gamma,
                           t_final=t_final, config_tag=16)
    except ValueError as exc:
        raise RejectSample(str(exc)) from exc


_TRY_SAMPLERS = {2: try_sample_config2, 3: try_sample_config3, 16: try_sample_config16}


def sample_spec(config_tag: int, rng: np.random.Generator,
                max_tries: int = 1000) -> RiemannSpec:
    """Rejection-sample a valid spec for one of the supported tags."""
    try:
        draw = _TRY_SAMPLERS[config_tag]
    except KeyError:
        raise UnknownConfiguration(
            f"no generator for configuration {config_tag}; have {SUPPORTED_TAGS}")
    for _ in range(max_tries):
        try:
            return draw(rng)
        except RejectSample:
            continue
    raise RejectSample(f"no valid configuration-{config_tag} draw in {max_tries} tries")


def sample_config2(rng, max_tries=1000):
    return sample_spec(2, rng, max_tries)


def sample_config3(rng, max_tries=1000):
    return sample_spec(3, rng, max_tries)


def sample_config16(rng, max_tries=1000):
    return sample_spec(16, rng, max_tries)


# --- published test problems ----------------------------------------------

_BUILTIN = {
    "config2": RiemannSpec(
        states=np.array([
            [1.0, 0.0, 0.0, 1.0],
            [0.5197, -0.7259, 0.0, 0.4],
            [1.0, -0.7259, -0.7259, 1.0],
            [0.5197, 0.0, -0.7259, 0.4],
        ]), gamma=1.4, t_final=0.2, config_tag=2),
    "config3": RiemannSpec(
        states=np.array([
            [1.5, 0.0, 0.0, 1.5],
            [0.5323, 1.206, 0.0, 0.3],
            [0.138, 1.206, 1.206, 0.029],
            [0.5323, 0.0, 1.206, 0.3],
        ]), gamma=1.4, t_final=0.3, config_tag=3),
    "config16": RiemannSpec(
        states=np.array([
            [0.5313, 0.1, 0.1, 0.4],
            [1.0222, -0.6179, 0.1, 1.0],
            [0.8, 0.1, 0.1, 1.0],
            [1.0, 0.1, 0.8276, 1.0],
        ]), gamma=1.4, t_final=0.2, config_tag=16),
    "config11": RiemannSpec(
        states=np.array([
            [1.0, 0.1, 0.0, 1.0],
            [0.5313, 0.8276, 0.0, 0.4],
            [0.8, 0.1, 0.0, 0.4],
            [0.5313, 0.1, 0.7276, 0.4],
        ]), gamma=1.4, t_final=0.3, config_tag=11),
    "config19": RiemannSpec(
        states=np.array([
            [1.0, 0.0, 0.3, 1.0],
            [2.0, 0.0, -0.3, 1.0],
            [1.0625, 0.0, 0.2145, 0.4],
            [0.5197, 0.0, -0.4259, 0.4],
        ]), gamma=1.4, t_final=0.3, config_tag=19),
}


def builtin_ic(name: str) -> RiemannSpec:
    """Published four-quadrant test problems by name (config2 .. config19)."""
    try:
        return _BUILTIN[name]
    except KeyError:
        raise UnknownName(f"no built-in initial condition {name!r}; have {sorted(_BUILTIN)}")


def builtin_names():
    return sorted(_BUILTIN)
