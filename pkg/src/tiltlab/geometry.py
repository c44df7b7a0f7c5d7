"""Geometric pose errors and tanh-limited velocity references.

The attitude error is the SO(3) vee-map error

    e_R = 1/2 (R_d^T R - R^T R_d)^vee

which for unit quaternions reduces to e_R = 2 w_e * vec(q_e) with
q_e = conj(q_d) * q. It vanishes iff R = R_d for relative rotations
below 180 deg; at exactly 180 deg it degenerates to zero (antipodal
singularity of geometric attitude control - excluded from scenarios).

Velocity references oppose the errors and saturate elementwise:

    v_ref = tanh(-k_p e_p),  w_ref = tanh(-k_R e_R)

with e_p = position - position_ref, so the reference always points back
toward the target.
"""

from dataclasses import dataclass, field

import numpy as np

from . import quat
from .rigidbody import RigidBodyState


@dataclass
class PoseReference:
    position_ref: np.ndarray = field(default_factory=lambda: np.zeros(3))
    attitude_ref: np.ndarray = field(default_factory=lambda: quat.IDENTITY.copy())

    def __post_init__(self):
        self.position_ref = np.asarray(self.position_ref, dtype=float).copy()
        self.attitude_ref = np.asarray(self.attitude_ref, dtype=float).copy()


@dataclass
class GeometricErrors:
    e_p: np.ndarray  # m, world
    e_R: np.ndarray  # rad (vee map)
    e_v: np.ndarray  # m/s, world (v - v_ref)
    e_omega: np.ndarray  # rad/s, body (w - w_ref)
    k_p: float
    k_R: float


def attitude_error(q, q_ref):
    """Vee-map attitude error, batched over leading dims."""
    qe = quat.multiply(quat.conjugate(q_ref), q)
    return 2.0 * qe[..., 0:1] * qe[..., 1:4]


def velocity_references(e_p, e_R, k_p, k_R):
    """Error-opposing tanh-saturated velocity references (elementwise)."""
    e_p = np.asarray(e_p, dtype=float)
    e_R = np.asarray(e_R, dtype=float)
    if k_p <= 0 or k_R <= 0:
        raise ValueError("velocity reference gains must be > 0")
    return np.tanh(-k_p * e_p), np.tanh(-k_R * e_R)


def geometric_errors(
    state: RigidBodyState, ref: PoseReference, k_p: float = 2.0, k_R: float = 2.0
) -> GeometricErrors:
    """Full error set for one rigid-body state against a pose reference."""
    e_p = state.position - ref.position_ref
    e_R = attitude_error(state.attitude, ref.attitude_ref)
    v_ref, w_ref = velocity_references(e_p, e_R, k_p, k_R)
    return GeometricErrors(
        e_p=e_p,
        e_R=e_R,
        e_v=state.lin_vel - v_ref,
        e_omega=state.ang_vel - w_ref,
        k_p=k_p,
        k_R=k_R,
    )
