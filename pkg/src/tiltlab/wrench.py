"""Thrust geometry: actuator states -> body wrench, plus ground effect.

Rotor i sits at p_i on the arm circle and tilts about the radial axis
a_i, so its thrust direction is t_i(alpha) = cos(alpha) z + sin(alpha) b_i
with b_i = a_i x z the tangential direction. Thrust magnitude is
f_i = k_f n_i^2 and the prop drag torque is spin_i k_m n_i^2 t_i.

For the hexa geometry the cross products collapse to

    p_i x z   =  r b_i
    p_i x b_i = -r z

which is also what makes the allocation matrix constant (see
`tiltlab.allocation`).
"""

import numpy as np

from .params import VehicleParams


def arm_tangents(params: VehicleParams):
    """b_i = a_i x z for each arm, shape (6, 3)."""
    a = params.arm_tilt_axes
    return np.stack([a[:, 1], -a[:, 0], np.zeros(6)], axis=-1)


def forward_wrench(bank, params: VehicleParams):
    """Total actuation wrench (force, torque) in the body frame.

    Pure function of the bank's tilt angles and prop speeds; ground effect
    and disturbances are composed by the environment, not here.
    """
    return wrench_components(bank.alpha, bank.prop_speed, params)


def wrench_components(alpha, prop_speed, params: VehicleParams):
    """Wrench from raw (..., 6) tilt angles and prop speeds."""
    alpha = np.asarray(alpha, dtype=float)
    n = np.asarray(prop_speed, dtype=float)
    b = arm_tangents(params)
    ca, sa = np.cos(alpha), np.sin(alpha)
    f = params.k_f * n * n
    drag = params.spin_directions * params.k_m * n * n
    r = params.arm_radius

    force = np.stack(
        [
            np.sum(f * sa * b[:, 0], axis=-1),
            np.sum(f * sa * b[:, 1], axis=-1),
            np.sum(f * ca, axis=-1),
        ],
        axis=-1,
    )
    torque = np.stack(
        [
            np.sum((f * ca * r + drag * sa) * b[:, 0], axis=-1),
            np.sum((f * ca * r + drag * sa) * b[:, 1], axis=-1),
            np.sum(-f * sa * r + drag * ca, axis=-1),
        ],
        axis=-1,
    )
    return force, torque


def ground_effect_gain(z, rotor_radius, max_gain=1.5):
    """Thrust multiplier 1 / (1 - (R / 4z)^2), clamped to max_gain.

    Cheeseman-Bennett style in-ground-effect augmentation. The clamp
    covers z at or below the model's validity floor (including z <= 0);
    the gain tends to 1 far from the surface.
    """
    z = np.asarray(z, dtype=float)
    # height below which the raw formula exceeds max_gain
    z_clamp = (rotor_radius / 4.0) / np.sqrt(1.0 - 1.0 / max_gain)
    ratio = rotor_radius / (4.0 * np.maximum(z, z_clamp))
    gain = 1.0 / (1.0 - ratio * ratio)
    return np.where(z <= z_clamp, max_gain, gain)


def apply_ground_effect(z, thrust, rotor_radius, max_gain=1.5):
    """Scale a thrust magnitude by the in-ground-effect gain at height z."""
    return thrust * ground_effect_gain(z, rotor_radius, max_gain)
