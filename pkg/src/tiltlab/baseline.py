"""Model-based baseline: geometric PD pose control + minimum-norm allocation.

The pose loop and the actuator loop are separate blocks. The pose loop
produces a desired body wrench

    F = R^T (-K_p e_p - K_v e_v + m g z_world)      (body frame)
    tau = -K_R e_R - K_w e_w

with e_v = v - v_ref against the tanh velocity references, and gravity
feed-forward using the *nominal* mass (the controller does not know the
randomized vehicle, which is exactly what produces the steady offset
under a mass mismatch). Allocation converts the wrench into tilt/speed
commands; the environment interface is jerk-level, so the controller
emits rate/acceleration commands that drive the integrated targets to
the allocation output within one policy step (clipped to full scale).
"""

from dataclasses import dataclass

import numpy as np

from . import quat
from .actuator import PROP_ACCEL_MAX, TILT_RATE_MAX
from .allocation import Allocator
from .geometry import GeometricErrors
from .params import GRAVITY, VehicleParams


@dataclass
class BaselineGains:
    K_p: float = 12.0  # N/m
    K_v: float = 16.0  # N/(m/s)
    K_R: float = 6.0  # N*m/rad
    K_w: float = 1.5  # N*m/(rad/s)
    k_p: float = 2.0  # velocity-reference gains (shared with the trainer)
    k_R: float = 2.0
    k_track: float = 60.0  # 1/s, actuator-target tracking bandwidth


def baseline_wrench(errors: GeometricErrors, attitude, params: VehicleParams,
                    gains: BaselineGains):
    """Desired body wrench for one state. Batched over leading dims."""
    f_world = np.stack(
        [
            -gains.K_p * errors.e_p[..., 0] - gains.K_v * errors.e_v[..., 0],
            -gains.K_p * errors.e_p[..., 1] - gains.K_v * errors.e_v[..., 1],
            -gains.K_p * errors.e_p[..., 2] - gains.K_v * errors.e_v[..., 2]
            + params.mass * GRAVITY,
        ],
        axis=-1,
    )
    force = quat.rotate_inv(attitude, f_world)
    torque = -gains.K_R * errors.e_R - gains.K_w * errors.e_omega
    return force, torque


class BaselineController:
    """Vectorized eval/rollout controller emitting normalized Action12."""

    name = "baseline"

    def __init__(self, nominal: VehicleParams, gains: BaselineGains = None):
        self.params = nominal
        self.gains = gains or BaselineGains()
        self.allocator = Allocator(nominal)

    def wrench_for(self, env):
        """Desired wrench per env, shape (K, 6)."""
        ar = env.arrays
        g = self.gains
        e_p = ar.pos - env.ref_pos
        from .geometry import attitude_error, velocity_references

        e_r = attitude_error(ar.quat, env.ref_quat)
        v_ref, w_ref = velocity_references(e_p, e_r, g.k_p, g.k_R)
        errs = GeometricErrors(
            e_p=e_p, e_R=e_r, e_v=ar.vel - v_ref, e_omega=ar.omega - w_ref,
            k_p=g.k_p, k_R=g.k_R,
        )
        force, torque = baseline_wrench(errs, ar.quat, self.params, self.gains)
        return np.concatenate([force, torque], axis=-1)

    def act(self, env) -> np.ndarray:
        """Rate/accel commands that track the allocation output."""
        wrench = self.wrench_for(env)
        dec = wrench @ self.allocator.pinv.T  # (K, 12) decomposed forces
        axial, lateral = dec[:, :6], dec[:, 6:]
        alpha_cmd = np.arctan2(lateral, axial)
        f = np.hypot(axial, lateral)
        speed_cmd = np.clip(np.sqrt(f / self.params.k_f), *self.params.prop_speed_limits)

        # proportional target tracking at k_track bandwidth: smoother than
        # deadbeat (cmd - target)/dt and well inside the rate limits
        ar = env.arrays
        k = self.gains.k_track
        tilt_rate = k * (alpha_cmd - ar.alpha_target) / TILT_RATE_MAX
        prop_acc = k * (speed_cmd - ar.prop_target) / PROP_ACCEL_MAX
        action = np.concatenate([tilt_rate, prop_acc], axis=-1)
        return np.clip(action, -1.0, 1.0)
