import numpy as np
import pytest

from tiltlab.actuator import ActuatorBank
from tiltlab.wrench import apply_ground_effect, forward_wrench, ground_effect_gain


def brute_force_wrench(alpha, speeds, params):
    """Independent per-rotor sum using generic Rodrigues rotations."""
    force = np.zeros(3)
    torque = np.zeros(3)
    z = np.array([0.0, 0.0, 1.0])
    for i in range(6):
        axis = params.arm_tilt_axes[i]
        a = alpha[i]
        # Rodrigues: rotate z about `axis` by a
        t_dir = (
            z * np.cos(a)
            + np.cross(axis, z) * np.sin(a)
            + axis * np.dot(axis, z) * (1.0 - np.cos(a))
        )
        f = params.k_f * speeds[i] ** 2
        force += f * t_dir
        torque += np.cross(params.arm_positions[i], f * t_dir)
        torque += params.spin_directions[i] * params.k_m * speeds[i] ** 2 * t_dir
    return force, torque


def test_zero_speed_zero_wrench(nominal):
    bank = ActuatorBank()
    f, t = forward_wrench(bank, nominal)
    assert np.array_equal(f, np.zeros(3))
    assert np.array_equal(t, np.zeros(3))


def test_symmetric_hover_wrench(nominal):
    n = 800.0
    bank = ActuatorBank(prop_speed=np.full(6, n))
    f, t = forward_wrench(bank, nominal)
    assert np.allclose(f, [0.0, 0.0, 6.0 * nominal.k_f * n**2], atol=1e-12)
    # alternating spin directions cancel the drag torque about z
    assert abs(t[2]) < 1e-12
    assert np.allclose(t, 0.0, atol=1e-10)


def test_matches_brute_force_oracle(nominal, rng):
    for _ in range(300):
        alpha = rng.uniform(-np.pi, np.pi, 6)
        speeds = rng.uniform(*nominal.prop_speed_limits, 6)
        bank = ActuatorBank(alpha=alpha, prop_speed=speeds)
        f, t = forward_wrench(bank, nominal)
        f2, t2 = brute_force_wrench(alpha, speeds, nominal)
        assert np.allclose(f, f2, atol=1e-12)
        assert np.allclose(t, t2, atol=1e-12)


def test_ground_effect_far_field():
    assert abs(ground_effect_gain(10.0, 0.1) - 1.0) < 1e-4


def test_ground_effect_at_one_radius():
    assert ground_effect_gain(0.1, 0.1) == pytest.approx(16.0 / 15.0, rel=1e-12)


def test_ground_effect_clamp():
    assert ground_effect_gain(0.01, 0.1) == 1.5
    assert ground_effect_gain(0.0, 0.1) == 1.5
    assert ground_effect_gain(-0.05, 0.1) == 1.5


def test_apply_ground_effect_scales_thrust():
    assert apply_ground_effect(0.1, 10.0, 0.1) == pytest.approx(10.0 * 16.0 / 15.0)
