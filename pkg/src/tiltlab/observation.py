"""The 51-element policy observation.

Frozen layout (golden-file tested; reordering is a breaking change):

    [ 0: 6]  sin(alpha_i), six arm tilt angles
    [ 6:12]  cos(alpha_i)
    [12:18]  propeller thrusts k_f n_i^2, normalized by nominal m g / 6
    [18:21]  position error, body frame (m)
    [21:24]  attitude vee-map error e_R
    [24:27]  linear velocity error v - v_ref, body frame (m/s)
    [27:30]  angular velocity error w - w_ref, body frame (rad/s)
    [30:36]  previous policy step's velocity errors (the prior [24:30])
    [36:39]  gravity direction in the body frame (unit, points down)
    [39:51]  previous network command (clipped, normalized)

Velocity references are tanh(-k e) computed in the world frame and the
error vectors are then rotated into the body frame, consistent with the
body-frame gravity vector. Thrust normalization uses the *nominal* mass
so randomized mass stays hidden from the policy.
"""

import numpy as np

OBS_SIZE = 51
ACT_SIZE = 12

SIN_ALPHA = slice(0, 6)
COS_ALPHA = slice(6, 12)
THRUST = slice(12, 18)
POS_ERR = slice(18, 21)
ATT_ERR = slice(21, 24)
LIN_VEL_ERR = slice(24, 27)
ANG_VEL_ERR = slice(27, 30)
PREV_VEL_ERR = slice(30, 36)
GRAVITY_DIR = slice(36, 39)
PREV_ACTION = slice(39, 51)

# block names accepted by the obs_noise config section
NOISE_BLOCKS = {
    "tilt": slice(0, 12),
    "thrust": THRUST,
    "pose_err": slice(18, 24),
    "vel_err": slice(24, 30),
    "prev_vel_err": PREV_VEL_ERR,
    "gravity": GRAVITY_DIR,
    "prev_action": PREV_ACTION,
}


def noise_std_vector(block_stds: dict) -> np.ndarray:
    """Expand a {block name: std} dict into the (51,) std vector."""
    out = np.zeros(OBS_SIZE)
    for name, std in block_stds.items():
        if name not in NOISE_BLOCKS:
            raise KeyError(f"unknown observation noise block '{name}'")
        out[NOISE_BLOCKS[name]] = float(std)
    return out


def assemble(alpha, thrust, pose_err, vel_err, prev_vel_err, gravity_body, prev_action):
    """Pack pre-computed blocks into (K, 51). Inputs are batched (K, ...)."""
    alpha = np.asarray(alpha, dtype=float)
    k = alpha.shape[0]
    obs = np.empty((k, OBS_SIZE))
    obs[:, SIN_ALPHA] = np.sin(alpha)
    obs[:, COS_ALPHA] = np.cos(alpha)
    obs[:, THRUST] = thrust
    obs[:, POS_ERR] = pose_err[:, :3]
    obs[:, ATT_ERR] = pose_err[:, 3:]
    obs[:, LIN_VEL_ERR] = vel_err[:, :3]
    obs[:, ANG_VEL_ERR] = vel_err[:, 3:]
    obs[:, PREV_VEL_ERR] = prev_vel_err
    obs[:, GRAVITY_DIR] = gravity_body
    obs[:, PREV_ACTION] = prev_action
    return obs


def build_observation(env_state, k_p: float = 2.0, k_R: float = 2.0,
                      nominal_mass: float = None) -> np.ndarray:
    """Observation for one EnvState (noiseless). Returns shape (51,).

    `nominal_mass` feeds the thrust normalization; defaults to the state's
    own params (i.e. treats them as nominal).
    """
    from . import quat
    from .geometry import attitude_error
    from .params import GRAVITY

    s = env_state
    m0 = nominal_mass if nominal_mass is not None else s.params.mass
    thrust = s.params.k_f * s.actuators.prop_speed**2 / (m0 * GRAVITY / 6.0)
    e_p_w = s.body.position - s.reference.position_ref
    e_r = attitude_error(s.body.attitude, s.reference.attitude_ref)
    v_ref = np.tanh(-k_p * e_p_w)
    w_ref = np.tanh(-k_R * e_r)
    ev_b = quat.rotate_inv(s.body.attitude, s.body.lin_vel - v_ref)
    pose_err = np.concatenate([quat.rotate_inv(s.body.attitude, e_p_w), e_r])
    vel_err = np.concatenate([ev_b, s.body.ang_vel - w_ref])
    gravity_body = quat.rotate_inv(s.body.attitude, np.array([0.0, 0.0, -1.0]))
    return assemble(
        alpha=s.actuators.alpha[None, :],
        thrust=thrust[None, :],
        pose_err=pose_err[None, :],
        vel_err=vel_err[None, :],
        prev_vel_err=np.asarray(s.prev_vel_errors, dtype=float)[None, :],
        gravity_body=gravity_body[None, :],
        prev_action=np.asarray(s.prev_action, dtype=float)[None, :],
    )[0]
