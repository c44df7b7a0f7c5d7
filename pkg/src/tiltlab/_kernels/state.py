"""Struct-of-arrays workspace shared by the numpy and compiled kernels.

One SimArrays instance holds the batched physical state for K
environments plus per-env parameters, all float64 C-contiguous so the
compiled kernel can take typed memoryviews straight off the attributes.
"""

import numpy as np


class SimArrays:
    """Batched simulator state. All arrays are owned, C-contiguous float64."""

    def __init__(self, num_envs, ring_len=1):
        k = int(num_envs)
        self.num_envs = k
        # rigid body
        self.pos = np.zeros((k, 3))
        self.quat = np.tile(np.array([1.0, 0.0, 0.0, 0.0]), (k, 1))
        self.vel = np.zeros((k, 3))
        self.omega = np.zeros((k, 3))
        # actuators
        self.alpha = np.zeros((k, 6))
        self.alpha_rate = np.zeros((k, 6))
        self.prop_speed = np.zeros((k, 6))
        self.prop_accel = np.zeros((k, 6))
        self.alpha_target = np.zeros((k, 6))
        self.prop_target = np.zeros((k, 6))
        # transport-delay ring buffer of targets (one slot per physics substep)
        self.ring_len = int(ring_len)
        self.ring_alpha = np.zeros((k, self.ring_len, 6))
        self.ring_prop = np.zeros((k, self.ring_len, 6))
        self.ring_head = 0
        self.delay_steps = np.zeros(k, dtype=np.int64)
        self.use_delay = False
        # per-env physical parameters
        self.mass = np.zeros(k)
        self.inertia = np.zeros((k, 3, 3))
        self.inv_inertia = np.zeros((k, 3, 3))
        self.com = np.zeros((k, 3))
        self.k_f = np.zeros(k)
        self.k_m = np.zeros(k)
        self.tilt_wn = np.zeros(k)
        self.tilt_zeta = np.zeros(k)
        self.prop_wn = np.zeros(k)
        self.prop_zeta = np.zeros(k)
        # shared geometry / limits
        self.arm_px = np.zeros(6)
        self.arm_py = np.zeros(6)
        self.tan_x = np.zeros(6)  # b_i = a_i x z
        self.tan_y = np.zeros(6)
        self.spin = np.zeros(6)
        self.arm_radius = 0.0
        self.rotor_radius = 0.1
        self.tilt_lo = -np.pi
        self.tilt_hi = np.pi
        self.prop_lo = 0.0
        self.prop_hi = 0.0
        self.gravity = 9.81
        # scenario flags
        self.ground_enabled = False
        self.ground_max_gain = 1.5
        # per-policy-step external inputs
        self.dist_force = np.zeros((k, 3))  # world frame
        self.dist_torque = np.zeros((k, 3))  # body frame
        self.ext_force = np.zeros((k, 3))  # body frame (per-rotor wind etc.)
        self.ext_torque = np.zeros((k, 3))

    def set_geometry(self, params):
        """Load shared geometry/limits from a VehicleParams."""
        self.arm_px[:] = params.arm_positions[:, 0]
        self.arm_py[:] = params.arm_positions[:, 1]
        a = params.arm_tilt_axes
        self.tan_x[:] = a[:, 1]
        self.tan_y[:] = -a[:, 0]
        self.spin[:] = params.spin_directions
        self.arm_radius = float(params.arm_radius)
        self.rotor_radius = float(params.rotor_radius)
        self.tilt_lo, self.tilt_hi = map(float, params.tilt_angle_limits)
        self.prop_lo, self.prop_hi = map(float, params.prop_speed_limits)

    def set_env_params(self, i, params):
        """Load env i's randomized physical constants."""
        self.mass[i] = params.mass
        self.inertia[i] = params.inertia
        self.inv_inertia[i] = np.linalg.inv(params.inertia)
        self.com[i] = params.com_offset
        self.k_f[i] = params.k_f
        self.k_m[i] = params.k_m
        self.tilt_wn[i] = params.tilt_omega_n
        self.tilt_zeta[i] = params.tilt_zeta
        self.prop_wn[i] = params.prop_omega_n
        self.prop_zeta[i] = params.prop_zeta
