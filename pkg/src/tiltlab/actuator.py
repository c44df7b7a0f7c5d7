"""Second-order tilt-servo and propeller-speed-loop models.

Each of the twelve actuator channels (six tilt angles, six prop speeds)
tracks its integrated target through

    x_ddot = wn^2 (x_target - x) - 2 zeta wn x_dot

advanced with classic RK4 per physics substep. Positions are clamped to
their limits; on a clamp the outward rate is zeroed (anti-windup).

Transport delay on the targets is a property of the environment's target
ring buffer (quantized to the physics dt), not of this module: a single
`step_actuators` call tracks whatever targets the bank currently holds.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .params import VehicleParams

TILT_RATE_MAX = 6.0  # rad/s, full-scale tilt-rate command
PROP_ACCEL_MAX = 10000.0 * 2.0 * np.pi / 60.0  # rad/s^2 (= +/-10000 rpm/s)


@dataclass
class ActuatorBank:
    """Tilt/prop states plus the integrated command targets, six arms each."""

    alpha: np.ndarray = field(default_factory=lambda: np.zeros(6))
    alpha_rate: np.ndarray = field(default_factory=lambda: np.zeros(6))
    prop_speed: np.ndarray = field(default_factory=lambda: np.zeros(6))
    prop_accel: np.ndarray = field(default_factory=lambda: np.zeros(6))
    alpha_target: np.ndarray = field(default_factory=lambda: np.zeros(6))
    prop_speed_target: np.ndarray = field(default_factory=lambda: np.zeros(6))

    def __post_init__(self):
        for name in (
            "alpha",
            "alpha_rate",
            "prop_speed",
            "prop_accel",
            "alpha_target",
            "prop_speed_target",
        ):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float).copy())

    @classmethod
    def at_trim(cls, params: VehicleParams):
        """Bank in steady hover trim: tilt 0, props at the hover speed."""
        n = params.hover_prop_speed()
        speeds = np.full(6, n)
        return cls(prop_speed=speeds.copy(), prop_speed_target=speeds.copy())


def rk4_second_order(y, v, target, wn, zeta, dt):
    """One RK4 step of the tracking ODE. Broadcasts over any shape."""

    def acc(yy, vv):
        return wn * wn * (target - yy) - 2.0 * zeta * wn * vv

    k1y = v
    k1v = acc(y, v)
    k2y = v + 0.5 * dt * k1v
    k2v = acc(y + 0.5 * dt * k1y, v + 0.5 * dt * k1v)
    k3y = v + 0.5 * dt * k2v
    k3v = acc(y + 0.5 * dt * k2y, v + 0.5 * dt * k2v)
    k4y = v + dt * k3v
    k4v = acc(y + dt * k3y, v + dt * k3v)
    y_new = y + (dt / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
    v_new = v + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return y_new, v_new


def clamp_with_rate(y, v, lo, hi):
    """Clamp y to [lo, hi]; zero the rate where it pushes further out."""
    over = y > hi
    under = y < lo
    y = np.where(over, hi, np.where(under, lo, y))
    v = np.where(over & (v > 0.0), 0.0, np.where(under & (v < 0.0), 0.0, v))
    return y, v


def integrate_action_targets(
    bank: ActuatorBank, action_scaled, dt: float, params: VehicleParams
) -> ActuatorBank:
    """Integrate physical-rate commands into the command targets.

    action_scaled[:6] are tilt rates (rad/s, expected within +/-6) and
    action_scaled[6:] are prop accelerations (rad/s^2, within +/-1047.2).
    Targets are clipped to the actuator limits after integration.
    """
    action_scaled = np.asarray(action_scaled, dtype=float)
    if action_scaled.shape[-1] != 12 or not np.all(np.isfinite(action_scaled)):
        raise ValueError("action must be 12 finite physical rates")
    a_t = np.clip(
        bank.alpha_target + action_scaled[..., :6] * dt,
        params.tilt_angle_limits[0],
        params.tilt_angle_limits[1],
    )
    p_t = np.clip(
        bank.prop_speed_target + action_scaled[..., 6:] * dt,
        params.prop_speed_limits[0],
        params.prop_speed_limits[1],
    )
    return replace(bank, alpha_target=a_t, prop_speed_target=p_t)


def step_actuators(bank: ActuatorBank, params: VehicleParams, dt: float) -> ActuatorBank:
    """Advance all twelve channels by one physics substep (dt <= 0.01 s)."""
    if not 0.0 < dt <= 0.01:
        raise ValueError(f"physics substep must be in (0, 0.01] s, got {dt}")
    a, ar = rk4_second_order(
        bank.alpha, bank.alpha_rate, bank.alpha_target,
        params.tilt_omega_n, params.tilt_zeta, dt,
    )
    a, ar = clamp_with_rate(a, ar, *params.tilt_angle_limits)
    n, na = rk4_second_order(
        bank.prop_speed, bank.prop_accel, bank.prop_speed_target,
        params.prop_omega_n, params.prop_zeta, dt,
    )
    n, na = clamp_with_rate(n, na, *params.prop_speed_limits)
    return replace(bank, alpha=a, alpha_rate=ar, prop_speed=n, prop_accel=na)
