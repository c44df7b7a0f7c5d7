"""Newton-Euler rigid-body step.

    m dv/dt = R F_body + m g + F_dist      (world frame)
    I dw/dt = tau_body - w x I w + tau_dist (body frame)

Translation uses the exact constant-acceleration update over one substep
(x += v dt + 1/2 a dt^2; v += a dt), which integrates the piecewise-
constant forces the simulator produces without secular energy drift.
Rotation advances omega explicitly and the quaternion by the exponential
map of the updated omega; the quaternion is renormalized every step.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import quat
from .params import GRAVITY, VehicleParams


@dataclass
class RigidBodyState:
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))  # m, world
    attitude: np.ndarray = field(default_factory=lambda: quat.IDENTITY.copy())
    lin_vel: np.ndarray = field(default_factory=lambda: np.zeros(3))  # m/s, world
    ang_vel: np.ndarray = field(default_factory=lambda: np.zeros(3))  # rad/s, body

    def __post_init__(self):
        for name in ("position", "attitude", "lin_vel", "ang_vel"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float).copy())


def step_rigid_body(
    state: RigidBodyState,
    force_body,
    torque_body,
    params: VehicleParams,
    dt: float,
    dist_force_world=None,
    dist_torque_body=None,
) -> RigidBodyState:
    """Advance one substep under a body wrench plus world/body disturbances."""
    if not 0.0 < dt <= 0.01:
        raise ValueError(f"physics substep must be in (0, 0.01] s, got {dt}")
    force_body = np.asarray(force_body, dtype=float)
    torque_body = np.asarray(torque_body, dtype=float)
    f_world = quat.rotate(state.attitude, force_body)
    acc = f_world / params.mass
    acc = acc + np.array([0.0, 0.0, -GRAVITY])
    if dist_force_world is not None:
        acc = acc + np.asarray(dist_force_world, dtype=float) / params.mass

    pos = state.position + state.lin_vel * dt + 0.5 * acc * dt * dt
    vel = state.lin_vel + acc * dt

    tau = torque_body.copy()
    if dist_torque_body is not None:
        tau = tau + np.asarray(dist_torque_body, dtype=float)
    iw = params.inertia @ state.ang_vel
    tau = tau - np.cross(state.ang_vel, iw)
    w = state.ang_vel + dt * np.linalg.solve(params.inertia, tau)
    q = quat.integrate(state.attitude, w, dt)
    return replace(state, position=pos, attitude=q, lin_vel=vel, ang_vel=w)


def mechanical_energy(state: RigidBodyState, params: VehicleParams) -> float:
    """Kinetic + potential energy, for integrator sanity checks."""
    ke_lin = 0.5 * params.mass * float(state.lin_vel @ state.lin_vel)
    ke_rot = 0.5 * float(state.ang_vel @ (params.inertia @ state.ang_vel))
    pe = params.mass * GRAVITY * float(state.position[2])
    return ke_lin + ke_rot + pe
