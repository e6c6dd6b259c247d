import numpy as np
import pytest

from conftest import random_conserved, random_primitives
from wenods.errors import DegenerateSpeed, NonPhysicalState
from wenods.euler import (GasModel, adaptive_dt, axis_wave_speed, conserved_to_primitive,
                          eigen_system, max_wave_speed, physical_flux,
                          primitive_to_conserved, swap_velocity_components)

GAS = GasModel(1.4)


def test_gas_model_rejects_gamma_at_most_one():
    with pytest.raises(ValueError):
        GasModel(1.0)


def test_primitive_to_conserved_stationary():
    q = primitive_to_conserved([1.0, 0.0, 0.0, 1.0], GAS)
    assert np.allclose(q, [1.0, 0.0, 0.0, 2.5], atol=1e-14, rtol=0)


def test_primitive_to_conserved_config3_corner_state():
    # quadrant-1 state of the four-shock test problem: E = p/(gamma-1)
    q = primitive_to_conserved([1.5, 0.0, 0.0, 1.5], GAS)
    assert np.allclose(q, [1.5, 0.0, 0.0, 3.75], atol=1e-14, rtol=0)


def test_round_trip_is_identity():
    rng = np.random.default_rng(7)
    w = random_primitives(rng, (1000,))
    back = conserved_to_primitive(primitive_to_conserved(w, GAS), GAS)
    assert np.abs(back - w).max() < 1e-14
    # the fast quadrant-3 state of the four-shock problem in particular
    w3 = np.array([0.138, 1.206, 1.206, 0.029])
    assert np.abs(conserved_to_primitive(primitive_to_conserved(w3, GAS), GAS) - w3).max() < 1e-16


def test_conserved_to_primitive_hand_value():
    w = conserved_to_primitive([1.0, 1.0, 0.0, 3.0], GAS)
    assert np.allclose(w, [1.0, 1.0, 0.0, 1.0], atol=1e-15)


def test_conserved_to_primitive_rejects_negative_energy():
    with pytest.raises(NonPhysicalState):
        conserved_to_primitive([1.0, 0.0, 0.0, -1.0], GAS)
    with pytest.raises(NonPhysicalState):
        conserved_to_primitive([-1.0, 0.0, 0.0, 2.5], GAS)


def test_physical_flux_stationary_state_is_pressure_only():
    q = np.array([1.0, 0.0, 0.0, 2.5])
    assert np.allclose(physical_flux(q, GAS, "x"), [0.0, 1.0, 0.0, 0.0], atol=0)
    assert np.allclose(physical_flux(q, GAS, "y"), [0.0, 0.0, 1.0, 0.0], atol=0)


def test_physical_flux_hand_value():
    f = physical_flux([1.0, 1.0, 0.0, 3.0], GAS, "x")
    assert np.allclose(f, [1.0, 2.0, 0.0, 4.0], atol=1e-15)


def test_flux_directions_swap_under_velocity_exchange(rng):
    q = random_conserved(rng, (50,))
    f = physical_flux(q, GAS, "x")
    g = physical_flux(swap_velocity_components(q), GAS, "y")
    assert np.abs(swap_velocity_components(g) - f).max() == 0.0


def test_eigen_system_inverse_pair(rng):
    q = random_conserved(rng, (1000,))
    for axis in ("x", "y"):
        es = eigen_system(q, np.roll(q, 1, axis=0), GAS, axis)
        prod = np.einsum("nab,nbc->nac", es.left, es.right)
        assert np.abs(prod - np.eye(4)).max() < 1e-12


def test_eigen_left_equals_dense_inverse_of_right(rng):
    q = random_conserved(rng, (200,))
    es = eigen_system(q, q, GAS, "x")
    inv = np.linalg.inv(es.right)
    assert np.abs(inv - es.left).max() < 1e-10


def test_constant_field_projection_round_trip():
    q = primitive_to_conserved([1.0, 0.3, -0.2, 0.9], GAS)
    es = eigen_system(q, q, GAS, "x")
    f = physical_flux(q, GAS, "x")
    assert np.abs(es.right @ (es.left @ f) - f).max() < 1e-13


def _fd_jacobian(q, axis, step=1e-6):
    jac = np.zeros((4, 4))
    for j in range(4):
        dq = np.zeros(4)
        dq[j] = step
        jac[:, j] = (physical_flux(q + dq, GAS, axis)
                     - physical_flux(q - dq, GAS, axis)) / (2 * step)
    return jac


@pytest.mark.parametrize("axis", ["x", "y"])
def test_eigen_decomposition_matches_fd_jacobian(axis, rng):
    # R diag(lam) L must reproduce the flux Jacobian at the mean state
    for _ in range(20):
        qa = random_conserved(rng, ())
        qb = random_conserved(rng, ())
        es = eigen_system(qa, qb, GAS, axis)
        q_avg = 0.5 * (qa + qb)
        w = conserved_to_primitive(q_avg, GAS)
        c = np.sqrt(GAS.gamma * w[3] / w[0])
        vel = w[1] if axis == "x" else w[2]
        lam = np.diag([vel - c, vel, vel, vel + c])
        assert np.abs(es.right @ lam @ es.left - _fd_jacobian(q_avg, axis)).max() < 1e-5


def test_max_wave_speed_single_state():
    q = primitive_to_conserved([1.0, 0.0, 0.0, 1.0], GAS)
    assert max_wave_speed(q, GAS) == pytest.approx(np.sqrt(1.4), abs=1e-14)


def test_max_wave_speed_moving_gas():
    q = primitive_to_conserved([1.0, 1.0, 0.0, 1.0], GAS)
    assert max_wave_speed(q, GAS) == pytest.approx(1.0 + np.sqrt(1.4), abs=1e-14)


def test_max_wave_speed_velocity_flip_invariant(rng):
    q = random_conserved(rng, (100,))
    flipped = q.copy()
    flipped[:, 1] *= -1.0
    flipped[:, 2] *= -1.0
    assert max_wave_speed(q, GAS) == max_wave_speed(flipped, GAS)


def test_axis_wave_speed_uses_axis_velocity():
    q = primitive_to_conserved([1.0, 2.0, 0.5, 1.0], GAS)
    c = np.sqrt(1.4)
    assert axis_wave_speed(q, GAS, "x") == pytest.approx(2.0 + c, abs=1e-14)
    assert axis_wave_speed(q, GAS, "y") == pytest.approx(0.5 + c, abs=1e-14)


def test_adaptive_dt_values():
    assert adaptive_dt(1.18322, 0.01, 0.01) == pytest.approx(0.0050710, abs=1e-6)
    assert adaptive_dt(2.5, 0.01, 0.01) * 2.5 / 0.01 == pytest.approx(0.6, abs=1e-15)
    assert adaptive_dt(1.0, 0.01, 0.02) == pytest.approx(0.006, abs=1e-15)


def test_adaptive_dt_rejects_zero_speed():
    with pytest.raises(DegenerateSpeed):
        adaptive_dt(0.0, 0.01, 0.01)
