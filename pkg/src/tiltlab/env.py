"""Batched tiltrotor pose-control environments.

A VecEnv owns K independent vehicle states stepped in lockstep at the
policy rate (100 Hz) with N physics substeps each. Environments never
share state: every env has its own randomized parameters and its own rng
stream, so a batch of K steps bitwise-identically to K separate envs and
fixed seeds reproduce trajectories exactly.

Per policy step: clip and scale the normalized action, integrate the
actuator command targets, run the physics substeps (actuators, thrust
geometry, ground effect, disturbances, rigid body), then refresh the
pose/velocity errors, posture reference, loss inputs and termination
flags that the trainer and harness consume.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import quat
from ._kernels import SimArrays, step_substeps
from .actuator import PROP_ACCEL_MAX, TILT_RATE_MAX, ActuatorBank
from .allocation import Allocator
from .geometry import PoseReference, attitude_error
from .params import RandomizationRanges, VehicleParams
from .rigidbody import RigidBodyState

# termination reasons
RUNNING, OUT_OF_BOUNDS, GROUND_CONTACT, TIME_LIMIT = 0, 1, 2, 3


@dataclass
class DisturbanceConfig:
    force_range: float = 5.0  # N, uniform per world axis
    torque_range: float = 1.0  # N*m, uniform per body axis
    period: float = 3.0  # s held between resamples


@dataclass
class DisturbanceState:
    force: np.ndarray = field(default_factory=lambda: np.zeros(3))  # N, world
    torque: np.ndarray = field(default_factory=lambda: np.zeros(3))  # N*m, body
    time_to_resample: float = 3.0
    force_range: float = 5.0
    torque_range: float = 1.0

    def __post_init__(self):
        self.force = np.asarray(self.force, dtype=float).copy()
        self.torque = np.asarray(self.torque, dtype=float).copy()


def sample_disturbance(rng: np.random.Generator, config: DisturbanceConfig) -> DisturbanceState:
    """Draw a wrench held constant for the next `period` seconds."""
    f = rng.uniform(-config.force_range, config.force_range, 3)
    t = rng.uniform(-config.torque_range, config.torque_range, 3)
    return DisturbanceState(
        force=f,
        torque=t,
        time_to_resample=config.period,
        force_range=config.force_range,
        torque_range=config.torque_range,
    )


@dataclass
class EnvConfig:
    policy_dt: float = 0.01  # s, 100 Hz policy
    substeps: int = 10  # physics substeps per policy step (dt = 1 ms)
    episode_time_limit: float = 10.0  # s; None/0 disables the limit
    pos_bound: float = 3.0  # m, termination radius around the reference
    ground_plane: bool = False  # enables ground effect, disables z<0 termination
    ground_max_gain: float = 1.5
    reference_position: np.ndarray = field(
        default_factory=lambda: np.array([0.0, 0.0, 1.5])
    )
    reference_attitude: np.ndarray = field(default_factory=lambda: quat.IDENTITY.copy())
    init_pos_range: float = 0.5  # m, uniform box half-width around the reference
    init_att_range: float = np.deg2rad(30.0)  # rad, uniform rotation magnitude
    randomization: RandomizationRanges | None = None
    disturbance: DisturbanceConfig | None = None
    wind: object | None = None  # duck-typed wind model (see tiltlab.scenarios)
    attached_mass: tuple | None = None  # (kg, offset 3-vector), applied at reset
    obs_noise_std: np.ndarray | None = None  # (51,) additive Gaussian stds
    k_p: float = 2.0  # velocity-reference position gain
    k_R: float = 2.0  # velocity-reference attitude gain
    auto_reset: bool = True

    def __post_init__(self):
        self.reference_position = np.asarray(self.reference_position, dtype=float)
        self.reference_attitude = np.asarray(self.reference_attitude, dtype=float)


@dataclass
class StepInfo:
    """Post-step diagnostics; the loss-term inputs and termination flags."""

    e_p: np.ndarray  # (K,3) world-frame position error
    e_R: np.ndarray  # (K,3) vee-map attitude error
    vel_err: np.ndarray  # (K,3) body-frame v - v_ref
    angvel_err: np.ndarray  # (K,3) w - w_ref
    alpha: np.ndarray  # (K,6)
    alpha_ref: np.ndarray  # (K,6) optimal posture reference
    loss_vel: np.ndarray  # (K,) |v - v_ref| + |w - w_ref|
    loss_posture: np.ndarray  # (K,) sum_i |alpha_i - alpha_ref_i|
    terminated: np.ndarray  # (K,) bool, failure (bounds / ground)
    truncated: np.ndarray  # (K,) bool, episode time limit
    reason: np.ndarray  # (K,) int codes
    terminal_obs: np.ndarray  # (K,51) noiseless post-step obs pre-reset; None when nothing ended

    @property
    def done(self):
        return self.terminated | self.truncated


class VecEnv:
    """K lockstep environments over one nominal vehicle + one config."""

    def __init__(self, num_envs, nominal: VehicleParams, cfg: EnvConfig = None,
                 seed=0, seed_seqs=None):
        self.cfg = cfg if cfg is not None else EnvConfig()
        self.nominal = nominal
        self.num_envs = int(num_envs)
        self.dt = self.cfg.policy_dt / self.cfg.substeps
        if not 0.0 < self.dt <= 0.01:
            raise ValueError("physics substep must be in (0, 0.01] s")

        max_delay = nominal.actuator_delay
        if self.cfg.randomization is not None:
            max_delay += self.cfg.randomization.delay_range[1]
        ring_len = int(np.ceil(max_delay / self.dt)) + 1

        ar = SimArrays(self.num_envs, ring_len=ring_len)
        ar.set_geometry(nominal)
        ar.ground_enabled = self.cfg.ground_plane
        ar.ground_max_gain = self.cfg.ground_max_gain
        self.arrays = ar

        # the posture/allocation reference always uses the nominal model:
        # it is part of the (model-based) control formulation, not physics
        self.allocator = Allocator(nominal)

        if seed_seqs is None:
            root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
            seed_seqs = root.spawn(self.num_envs)
        self.rngs = [np.random.Generator(np.random.PCG64(ss)) for ss in seed_seqs]

        k = self.num_envs
        self.ref_pos = np.tile(self.cfg.reference_position, (k, 1))
        self.ref_quat = np.tile(self.cfg.reference_attitude, (k, 1))
        self.prev_action = np.zeros((k, 12))
        self.vel_err_now = np.zeros((k, 6))
        self.vel_err_prev = np.zeros((k, 6))
        self.pose_err = np.zeros((k, 6))  # [e_p body, e_R]
        self.dist_force = np.zeros((k, 3))
        self.dist_torque = np.zeros((k, 3))
        self.dist_steps_left = np.zeros(k, dtype=np.int64)
        self.ep_steps = np.zeros(k, dtype=np.int64)
        self.env_params = [nominal] * k
        if self.cfg.disturbance is not None:
            self.dist_period_steps = max(
                1, int(round(self.cfg.disturbance.period / self.cfg.policy_dt))
            )
        else:
            self.dist_period_steps = 0
        if self.cfg.episode_time_limit:
            self.limit_steps = int(round(self.cfg.episode_time_limit / self.cfg.policy_dt))
        else:
            self.limit_steps = 0
        self.reset_all()

    # ------------------------------------------------------------------ reset

    def reset_all(self):
        for i in range(self.num_envs):
            self.reset_env(i)

    def _draw_params(self, rng) -> VehicleParams:
        from .params import randomize_params

        p = self.nominal
        if self.cfg.randomization is not None:
            p = randomize_params(p, rng, self.cfg.randomization)
        if self.cfg.attached_mass is not None:
            from .params import attach_point_mass

            mass, offset = self.cfg.attached_mass
            p = attach_point_mass(p, mass, offset)
        return p

    def reset_env(self, i):
        """Re-randomize and re-initialize env i. Fixed rng draw order."""
        rng = self.rngs[i]
        ar = self.arrays
        p = self._draw_params(rng)
        self.env_params[i] = p
        ar.set_env_params(i, p)

        # pose: uniform box + uniform rotation magnitude about a random axis
        box = rng.uniform(-1.0, 1.0, 3) * self.cfg.init_pos_range
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        angle = rng.uniform(0.0, 1.0) * self.cfg.init_att_range
        dq = quat.from_axis_angle(axis, angle)
        ar.pos[i] = self.ref_pos[i] + box
        ar.quat[i] = quat.multiply(self.ref_quat[i], dq)
        ar.vel[i] = 0.0
        ar.omega[i] = 0.0

        # actuators at the hover trim for the initial attitude: allocate the
        # true-weight force plus the torque that cancels the CoM offset, so
        # point-mass episodes start balanced (controllers fix the residue)
        from .params import GRAVITY

        f_body = quat.rotate_inv(ar.quat[i], np.array([0.0, 0.0, p.mass * GRAVITY]))
        w = np.concatenate([f_body, np.cross(p.com_offset, f_body)])
        dec = self.allocator.pinv @ w
        alpha0 = np.arctan2(dec[6:], dec[:6])
        n0 = np.clip(
            np.sqrt(np.hypot(dec[:6], dec[6:]) / p.k_f), *p.prop_speed_limits
        )
        ar.alpha[i] = alpha0
        ar.alpha_rate[i] = 0.0
        ar.prop_speed[i] = n0
        ar.prop_accel[i] = 0.0
        ar.alpha_target[i] = alpha0
        ar.prop_target[i] = n0
        ar.ring_alpha[i] = alpha0
        ar.ring_prop[i] = n0
        ar.delay_steps[i] = int(round(p.actuator_delay / self.dt))
        ar.use_delay = bool(ar.delay_steps.max() > 0)

        if self.cfg.disturbance is not None:
            d = sample_disturbance(rng, self.cfg.disturbance)
            self.dist_force[i] = d.force
            self.dist_torque[i] = d.torque
            self.dist_steps_left[i] = self.dist_period_steps
        else:
            self.dist_force[i] = 0.0
            self.dist_torque[i] = 0.0
            self.dist_steps_left[i] = 0

        self.ep_steps[i] = 0
        self.prev_action[i] = 0.0
        e_p_w = ar.pos[i] - self.ref_pos[i]
        e_r = attitude_error(ar.quat[i], self.ref_quat[i])
        v_ref = np.tanh(-self.cfg.k_p * e_p_w)
        w_ref = np.tanh(-self.cfg.k_R * e_r)
        ev_b = quat.rotate_inv(ar.quat[i], ar.vel[i] - v_ref)
        errs = np.concatenate([ev_b, ar.omega[i] - w_ref])
        self.vel_err_now[i] = errs
        self.vel_err_prev[i] = errs
        self.pose_err[i, :3] = quat.rotate_inv(ar.quat[i], e_p_w)
        self.pose_err[i, 3:] = e_r

    # ------------------------------------------------------------------- step

    @property
    def sim_time(self):
        return self.ep_steps * self.cfg.policy_dt

    def step(self, actions) -> StepInfo:
        actions = np.asarray(actions, dtype=float).reshape(self.num_envs, 12)
        if not np.all(np.isfinite(actions)):
            raise ValueError("actions must be finite")
        a = np.clip(actions, -1.0, 1.0)
        ar = self.arrays
        cfg = self.cfg

        # integrate jerk-level commands into targets, clip to limits
        ar.alpha_target = np.clip(
            ar.alpha_target + a[:, :6] * TILT_RATE_MAX * cfg.policy_dt,
            ar.tilt_lo, ar.tilt_hi,
        )
        ar.prop_target = np.clip(
            ar.prop_target + a[:, 6:] * PROP_ACCEL_MAX * cfg.policy_dt,
            ar.prop_lo, ar.prop_hi,
        )

        # external inputs held constant over this policy step
        if cfg.wind is not None:
            t = self.sim_time
            ar.dist_force[:] = self.dist_force + cfg.wind.world_force(t)
            per_rotor = cfg.wind.per_rotor(t)
            if per_rotor is not None:
                d_body = quat.rotate_inv(ar.quat, cfg.wind.direction[None, :])
                ar.ext_force[:] = d_body * per_rotor.sum(axis=1, keepdims=True)
                arm = np.stack([ar.arm_px, ar.arm_py, np.zeros(6)], axis=-1)
                weighted = per_rotor @ arm  # sum_j m_j p_j
                ar.ext_torque[:] = np.cross(weighted, d_body)
            else:
                ar.ext_force[:] = 0.0
                ar.ext_torque[:] = 0.0
        else:
            ar.dist_force[:] = self.dist_force
            ar.ext_force[:] = 0.0
            ar.ext_torque[:] = 0.0
        ar.dist_torque[:] = self.dist_torque

        step_substeps(ar, cfg.substeps, self.dt)
        self.ep_steps += 1

        # disturbance hold/resample bookkeeping (exact 3 s cadence in steps)
        if self.cfg.disturbance is not None:
            self.dist_steps_left -= 1
            for i in np.nonzero(self.dist_steps_left <= 0)[0]:
                d = sample_disturbance(self.rngs[i], self.cfg.disturbance)
                self.dist_force[i] = d.force
                self.dist_torque[i] = d.torque
                self.dist_steps_left[i] = self.dist_period_steps

        # post-step errors, posture reference, loss inputs
        e_p_w = ar.pos - self.ref_pos
        e_r = attitude_error(ar.quat, self.ref_quat)
        v_ref = np.tanh(-cfg.k_p * e_p_w)
        w_ref = np.tanh(-cfg.k_R * e_r)
        ev_b = quat.rotate_inv(ar.quat, ar.vel - v_ref)
        ew = ar.omega - w_ref
        alpha_ref = self.allocator.posture_reference(ar.quat)
        loss_vel = np.linalg.norm(ev_b, axis=1) + np.linalg.norm(ew, axis=1)
        loss_posture = np.sum(np.abs(ar.alpha - alpha_ref), axis=1)

        dist2 = np.linalg.norm(e_p_w, axis=1)
        out = dist2 > cfg.pos_bound
        if cfg.ground_plane:
            ground = np.zeros(self.num_envs, dtype=bool)
        else:
            ground = ar.pos[:, 2] < 0.0
        terminated = out | ground
        if self.limit_steps:
            truncated = (self.ep_steps >= self.limit_steps) & ~terminated
        else:
            truncated = np.zeros(self.num_envs, dtype=bool)
        reason = np.zeros(self.num_envs, dtype=np.int64)
        reason[ground] = GROUND_CONTACT
        reason[out] = OUT_OF_BOUNDS
        reason[truncated] = TIME_LIMIT

        # roll the error history forward, then snapshot the terminal obs
        # (only needed when something ended; it feeds the value bootstrap)
        self.vel_err_prev[:] = self.vel_err_now
        self.vel_err_now[:, :3] = ev_b
        self.vel_err_now[:, 3:] = ew
        self.pose_err[:, :3] = quat.rotate_inv(ar.quat, e_p_w)
        self.pose_err[:, 3:] = e_r
        self.prev_action[:] = a
        any_done = bool(np.any(terminated) or np.any(truncated))
        terminal_obs = self._build_obs() if any_done else None

        info = StepInfo(
            e_p=e_p_w.copy(),
            e_R=e_r.copy(),
            vel_err=ev_b.copy(),
            angvel_err=ew.copy(),
            alpha=ar.alpha.copy(),
            alpha_ref=alpha_ref,
            loss_vel=loss_vel,
            loss_posture=loss_posture,
            terminated=terminated,
            truncated=truncated,
            reason=reason,
            terminal_obs=terminal_obs,
        )
        if cfg.auto_reset:
            for i in np.nonzero(terminated | truncated)[0]:
                self.reset_env(i)
        return info

    # ------------------------------------------------------------ observation

    def _build_obs(self):
        from .observation import assemble
        from .params import GRAVITY

        ar = self.arrays
        thrust_norm = self.nominal.mass * GRAVITY / 6.0
        thrust = ar.k_f[:, None] * ar.prop_speed**2 / thrust_norm
        gravity_body = quat.rotate_inv(ar.quat, np.array([0.0, 0.0, -1.0]))
        return assemble(
            alpha=ar.alpha,
            thrust=thrust,
            pose_err=self.pose_err,
            vel_err=self.vel_err_now,
            prev_vel_err=self.vel_err_prev,
            gravity_body=gravity_body,
            prev_action=self.prev_action,
        )

    def observe(self, noise: bool = True) -> np.ndarray:
        """Current (K, 51) observation; optional per-block Gaussian noise."""
        obs = self._build_obs()
        std = self.cfg.obs_noise_std
        if noise and std is not None and np.any(std > 0):
            for i in range(self.num_envs):
                obs[i] += self.rngs[i].normal(0.0, 1.0, 51) * std
        return obs

    # ------------------------------------------------- single-env state views

    def export_state(self, i) -> "EnvState":
        ar = self.arrays
        return EnvState(
            body=RigidBodyState(
                position=ar.pos[i], attitude=ar.quat[i],
                lin_vel=ar.vel[i], ang_vel=ar.omega[i],
            ),
            actuators=ActuatorBank(
                alpha=ar.alpha[i], alpha_rate=ar.alpha_rate[i],
                prop_speed=ar.prop_speed[i], prop_accel=ar.prop_accel[i],
                alpha_target=ar.alpha_target[i], prop_speed_target=ar.prop_target[i],
            ),
            params=self.env_params[i],
            disturbance=DisturbanceState(
                force=self.dist_force[i],
                torque=self.dist_torque[i],
                time_to_resample=float(self.dist_steps_left[i]) * self.cfg.policy_dt,
                force_range=(self.cfg.disturbance.force_range if self.cfg.disturbance else 0.0),
                torque_range=(self.cfg.disturbance.torque_range if self.cfg.disturbance else 0.0),
            ),
            reference=PoseReference(self.ref_pos[i], self.ref_quat[i]),
            prev_action=self.prev_action[i].copy(),
            prev_vel_errors=self.vel_err_prev[i].copy(),
            sim_time=float(self.ep_steps[i]) * self.cfg.policy_dt,
        )

    def import_state(self, i, state: "EnvState"):
        ar = self.arrays
        p = state.params
        self.env_params[i] = p
        ar.set_env_params(i, p)
        ar.pos[i] = state.body.position
        ar.quat[i] = state.body.attitude
        ar.vel[i] = state.body.lin_vel
        ar.omega[i] = state.body.ang_vel
        b = state.actuators
        ar.alpha[i] = b.alpha
        ar.alpha_rate[i] = b.alpha_rate
        ar.prop_speed[i] = b.prop_speed
        ar.prop_accel[i] = b.prop_accel
        ar.alpha_target[i] = b.alpha_target
        ar.prop_target[i] = b.prop_speed_target
        # EnvState carries no target history: treat current targets as held
        ar.ring_alpha[i] = b.alpha_target
        ar.ring_prop[i] = b.prop_speed_target
        ar.delay_steps[i] = int(round(p.actuator_delay / self.dt))
        ar.use_delay = bool(ar.delay_steps.max() > 0)
        self.ref_pos[i] = state.reference.position_ref
        self.ref_quat[i] = state.reference.attitude_ref
        self.dist_force[i] = state.disturbance.force
        self.dist_torque[i] = state.disturbance.torque
        self.dist_steps_left[i] = int(round(state.disturbance.time_to_resample / self.cfg.policy_dt))
        self.prev_action[i] = state.prev_action
        self.vel_err_prev[i] = state.prev_vel_errors
        self.ep_steps[i] = int(round(state.sim_time / self.cfg.policy_dt))
        # current-state velocity errors are recomputed, not stored
        e_p_w = ar.pos[i] - self.ref_pos[i]
        e_r = attitude_error(ar.quat[i], self.ref_quat[i])
        v_ref = np.tanh(-self.cfg.k_p * e_p_w)
        w_ref = np.tanh(-self.cfg.k_R * e_r)
        self.vel_err_now[i, :3] = quat.rotate_inv(ar.quat[i], ar.vel[i] - v_ref)
        self.vel_err_now[i, 3:] = ar.omega[i] - w_ref
        self.pose_err[i, :3] = quat.rotate_inv(ar.quat[i], e_p_w)
        self.pose_err[i, 3:] = e_r


@dataclass
class EnvState:
    """Complete single-environment state (value semantics)."""

    body: RigidBodyState
    actuators: ActuatorBank
    params: VehicleParams
    disturbance: DisturbanceState
    reference: PoseReference
    prev_action: np.ndarray
    prev_vel_errors: np.ndarray
    sim_time: float = 0.0

    def __post_init__(self):
        self.prev_action = np.asarray(self.prev_action, dtype=float).copy()
        self.prev_vel_errors = np.asarray(self.prev_vel_errors, dtype=float).copy()


def env_step(state: EnvState, action, cfg: EnvConfig = None, rng_seed=0):
    """Pure single-env step: returns the advanced EnvState and its StepInfo.

    Convenience wrapper over a one-env VecEnv; `rng_seed` only matters when
    the step crosses a disturbance resample boundary.
    """
    if cfg is None:
        cfg = EnvConfig(randomization=None, auto_reset=False)
    else:
        cfg = replace(cfg, auto_reset=False)
    vec = VecEnv(1, state.params, cfg, seed=rng_seed)
    vec.import_state(0, state)
    info = vec.step(np.asarray(action, dtype=float).reshape(1, 12))
    return vec.export_state(0), info
