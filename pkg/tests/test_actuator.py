import numpy as np
import pytest

from tiltlab.actuator import (
    PROP_ACCEL_MAX,
    ActuatorBank,
    integrate_action_targets,
    step_actuators,
)


def test_zero_rate_leaves_targets(nominal):
    bank = ActuatorBank.at_trim(nominal)
    out = integrate_action_targets(bank, np.zeros(12), 0.01, nominal)
    assert np.array_equal(out.alpha_target, bank.alpha_target)
    assert np.array_equal(out.prop_speed_target, bank.prop_speed_target)


def test_full_tilt_rate_advances_006(nominal):
    bank = ActuatorBank.at_trim(nominal)
    action = np.zeros(12)
    action[:6] = 6.0  # rad/s full scale
    out = integrate_action_targets(bank, action, 0.01, nominal)
    assert np.allclose(out.alpha_target, 0.06, atol=1e-15)


def test_target_saturation_matches_clamped_integral(nominal):
    # oracle: clamp of the analytic integral n0 + a t at the speed ceiling
    bank = ActuatorBank.at_trim(nominal)
    action = np.zeros(12)
    action[6:] = PROP_ACCEL_MAX  # max acceleration, 1 s worth of steps
    for _ in range(100):
        bank = integrate_action_targets(bank, action, 0.01, nominal)
    analytic = min(
        nominal.hover_prop_speed() + PROP_ACCEL_MAX * 1.0, nominal.prop_speed_limits[1]
    )
    assert np.all(bank.prop_speed_target == nominal.prop_speed_limits[1])
    assert analytic == nominal.prop_speed_limits[1]


def test_nonfinite_action_rejected(nominal):
    bank = ActuatorBank.at_trim(nominal)
    bad = np.zeros(12)
    bad[3] = np.nan
    with pytest.raises(ValueError, match="finite"):
        integrate_action_targets(bank, bad, 0.01, nominal)


def test_equilibrium_is_fixed_point(nominal):
    bank = ActuatorBank.at_trim(nominal)
    out = step_actuators(bank, nominal, 0.001)
    assert np.allclose(out.alpha, bank.alpha, atol=1e-15)
    assert np.allclose(out.prop_speed, bank.prop_speed, atol=1e-12)
    assert np.allclose(out.alpha_rate, 0.0, atol=1e-15)


def _simulate_step_response(wn, zeta, t_end, dt=1e-3):
    """Unit step from 0: returns (times, positions) using the tilt channel."""
    from dataclasses import replace

    from tiltlab.params import VehicleParams

    params = VehicleParams(tilt_omega_n=wn, tilt_zeta=zeta).validate()
    bank = ActuatorBank(alpha_target=np.ones(6))
    times, ys = [0.0], [0.0]
    steps = int(round(t_end / dt))
    for k in range(steps):
        bank = step_actuators(bank, params, dt)
        times.append((k + 1) * dt)
        ys.append(bank.alpha[0])
    return np.array(times), np.array(ys)


def test_critically_damped_step_response():
    # closed form for zeta = 1: y(t) = 1 - (1 + wn t) exp(-wn t)
    wn = 20.0
    t, y = _simulate_step_response(wn, 1.0, 0.1)
    expected = 1.0 - (1.0 + wn * t[-1]) * np.exp(-wn * t[-1])
    assert abs(y[-1] - expected) / expected < 1e-4


def test_underdamped_overshoot():
    # standard overshoot exp(-zeta pi / sqrt(1 - zeta^2)) for zeta = 0.5
    zeta = 0.5
    t, y = _simulate_step_response(20.0, zeta, 1.0)
    overshoot = y.max() - 1.0
    expected = np.exp(-zeta * np.pi / np.sqrt(1.0 - zeta**2))
    assert abs(overshoot - expected) < 1e-3


def test_substep_bounds(nominal):
    bank = ActuatorBank.at_trim(nominal)
    with pytest.raises(ValueError):
        step_actuators(bank, nominal, 0.02)
    with pytest.raises(ValueError):
        step_actuators(bank, nominal, 0.0)
