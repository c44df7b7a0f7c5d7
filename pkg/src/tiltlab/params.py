"""Vehicle physical model and domain randomization.

The nominal numbers below are fabricated but plausible for a ~4 kg
tilt-arm hexarotor; none are measured from hardware. Everything is
configurable through the `vehicle` config section.
"""

from dataclasses import dataclass, field, replace

import numpy as np

GRAVITY = 9.81


def _hexa_arm_angles():
    return np.arange(6) * (np.pi / 3.0)


@dataclass
class VehicleParams:
    """Rigid-body, geometry and actuator constants for one vehicle."""

    mass: float = 4.0
    inertia: np.ndarray = field(
        default_factory=lambda: np.diag([0.08, 0.08, 0.14])
    )
    com_offset: np.ndarray = field(default_factory=lambda: np.zeros(3))
    arm_radius: float = 0.3
    arm_positions: np.ndarray = None  # (6, 3) body frame, filled in __post_init__
    arm_tilt_axes: np.ndarray = None  # (6, 3) unit radial directions
    spin_directions: np.ndarray = field(
        default_factory=lambda: np.array([1.0, -1.0, 1.0, -1.0, 1.0, -1.0])
    )
    k_f: float = 1.2e-5  # N / (rad/s)^2
    k_m: float = 1.5e-7  # N*m / (rad/s)^2
    tilt_omega_n: float = 20.0  # rad/s
    tilt_zeta: float = 1.0
    prop_omega_n: float = 60.0  # rad/s
    prop_zeta: float = 0.9
    prop_speed_limits: tuple = (100.0, 1100.0)  # rad/s
    tilt_angle_limits: tuple = (-np.pi, np.pi)  # rad
    actuator_delay: float = 0.0  # s, transport delay on targets
    rotor_radius: float = 0.1  # m, used by the ground-effect model

    def __post_init__(self):
        ang = _hexa_arm_angles()
        radial = np.stack([np.cos(ang), np.sin(ang), np.zeros(6)], axis=-1)
        if self.arm_positions is None:
            self.arm_positions = self.arm_radius * radial
        if self.arm_tilt_axes is None:
            self.arm_tilt_axes = radial
        self.inertia = np.asarray(self.inertia, dtype=float)
        self.com_offset = np.asarray(self.com_offset, dtype=float)
        self.arm_positions = np.asarray(self.arm_positions, dtype=float)
        self.arm_tilt_axes = np.asarray(self.arm_tilt_axes, dtype=float)
        self.spin_directions = np.asarray(self.spin_directions, dtype=float)

    def validate(self):
        if not self.mass > 0:
            raise ValueError(f"vehicle.mass must be > 0 kg, got {self.mass}")
        if not np.allclose(self.inertia, self.inertia.T, atol=1e-12):
            raise ValueError("vehicle inertia tensor must be symmetric")
        if np.any(np.linalg.eigvalsh(self.inertia) <= 0):
            raise ValueError("vehicle inertia tensor must be positive definite")
        norms = np.linalg.norm(self.arm_tilt_axes, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise ValueError("arm tilt axes must be unit vectors")
        if self.prop_speed_limits[0] < 0:
            raise ValueError("prop_speed_limits.min must be >= 0 rad/s")
        if self.prop_speed_limits[0] >= self.prop_speed_limits[1]:
            raise ValueError("prop_speed_limits must satisfy min < max")
        if self.tilt_zeta <= 0 or self.prop_zeta <= 0:
            raise ValueError("actuator damping ratios must be > 0")
        if self.actuator_delay < 0:
            raise ValueError("actuator_delay must be >= 0 s")
        return self

    def hover_prop_speed(self):
        """Prop speed (rad/s) at which six untilted rotors carry the weight."""
        return float(np.sqrt(self.mass * GRAVITY / (6.0 * self.k_f)))


def attach_point_mass(params: VehicleParams, mass: float, offset) -> VehicleParams:
    """Bolt a point mass onto the airframe at `offset` (m, body frame).

    Total mass increases, the inertia tensor (about the body origin) gains
    the parallel-axis term m (|r|^2 I - r r^T), and the center of mass
    shifts toward the attachment point.
    """
    offset = np.asarray(offset, dtype=float)
    r2 = float(offset @ offset)
    pa = mass * (r2 * np.eye(3) - np.outer(offset, offset))
    total = params.mass + mass
    com = (params.mass * params.com_offset + mass * offset) / total
    return replace(
        params,
        mass=total,
        inertia=params.inertia + pa,
        com_offset=com,
    )


@dataclass
class RandomizationRanges:
    """Per-episode parameter perturbations (multiplicative unless noted)."""

    mass_scale: tuple = (1.0, 1.0)
    inertia_scale: tuple = (1.0, 1.0)
    kf_scale: tuple = (1.0, 1.0)
    tilt_omega_scale: tuple = (1.0, 1.0)
    tilt_zeta_scale: tuple = (1.0, 1.0)
    prop_omega_scale: tuple = (1.0, 1.0)
    prop_zeta_scale: tuple = (1.0, 1.0)
    delay_range: tuple = (0.0, 0.0)  # s, additive
    com_offset_radius: float = 0.0  # m, uniform in a ball
    point_mass_range: tuple = (0.0, 0.0)  # kg
    point_mass_offset: float = 0.1  # m, attachment radius in the body xy plane

    @classmethod
    def zero(cls):
        return cls()


def randomize_params(
    nominal: VehicleParams, rng: np.random.Generator, ranges: RandomizationRanges
) -> VehicleParams:
    """Draw one randomized vehicle around `nominal`.

    The draw order is fixed; with all ranges collapsed the output equals the
    nominal bitwise and the rng still advances identically, which keeps
    batched and sequential env resets in lockstep.
    """
    mass_s = rng.uniform(*ranges.mass_scale)
    inertia_s = rng.uniform(*ranges.inertia_scale)
    kf_s = rng.uniform(*ranges.kf_scale)
    tw_s = rng.uniform(*ranges.tilt_omega_scale)
    tz_s = rng.uniform(*ranges.tilt_zeta_scale)
    pw_s = rng.uniform(*ranges.prop_omega_scale)
    pz_s = rng.uniform(*ranges.prop_zeta_scale)
    delay = rng.uniform(*ranges.delay_range)
    dir3 = rng.normal(size=3)
    u = rng.uniform(0.0, 1.0)
    com = nominal.com_offset
    if ranges.com_offset_radius > 0.0:
        dir3 = dir3 / np.linalg.norm(dir3)
        com = com + ranges.com_offset_radius * np.cbrt(u) * dir3
    pm = rng.uniform(*ranges.point_mass_range)
    pm_angle = rng.uniform(0.0, 2.0 * np.pi)

    out = replace(
        nominal,
        mass=nominal.mass * mass_s,
        inertia=nominal.inertia * inertia_s,
        com_offset=com,
        k_f=nominal.k_f * kf_s,
        tilt_omega_n=nominal.tilt_omega_n * tw_s,
        tilt_zeta=nominal.tilt_zeta * tz_s,
        prop_omega_n=nominal.prop_omega_n * pw_s,
        prop_zeta=nominal.prop_zeta * pz_s,
        actuator_delay=nominal.actuator_delay + delay,
    )
    if pm > 0.0:
        offset = ranges.point_mass_offset * np.array(
            [np.cos(pm_angle), np.sin(pm_angle), 0.0]
        )
        out = attach_point_mass(out, pm, offset)
    return out
