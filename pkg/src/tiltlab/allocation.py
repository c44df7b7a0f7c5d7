"""Minimum-norm wrench allocation and the energy-optimal posture reference.

Decomposing each rotor's thrust into an axial part (along body z) and a
lateral part (along the tilt-circle tangent b_i) makes the actuator-to-
wrench map linear with a constant 6x12 matrix A:

    axial column i:   force (0, 0, 1),          torque r b_i + c s_i z
    lateral column i: force b_i,                torque -r z + c s_i b_i

with r the arm radius, s_i the spin direction and c = k_m / k_f (drag
torque per unit thrust). `allocate` solves A F = w by pseudo-inverse
(minimum-norm over the 6-dim null space = minimum internal forces), then
recovers per-arm commands

    alpha_i = atan2(lateral_i, axial_i)
    n_i     = sqrt(|(axial_i, lateral_i)| / k_f)   (clipped to limits)

The posture reference alpha_ref is the same allocation applied to the
gravity-compensating hover wrench at the current attitude; it depends
only on the attitude because atan2 is scale-invariant.
"""

from dataclasses import dataclass

import numpy as np

from . import quat
from .params import GRAVITY, VehicleParams
from .wrench import arm_tangents, wrench_components


class InfeasibleWrenchError(ValueError):
    """Requested wrench unreachable within actuator limits (post-clip residual)."""


@dataclass
class AllocationResult:
    alpha_cmd: np.ndarray  # (6,) rad
    prop_speed_cmd: np.ndarray  # (6,) rad/s, clipped to limits
    decomposed_forces: np.ndarray  # (12,) N: [axial x6, lateral x6]
    residual: np.ndarray  # (6,) achieved-minus-desired wrench


def allocation_matrix(params: VehicleParams) -> np.ndarray:
    """Constant 6x12 map from decomposed per-arm forces to the body wrench."""
    b = arm_tangents(params)
    r = params.arm_radius
    c = params.k_m / params.k_f
    s = params.spin_directions
    a = np.zeros((6, 12))
    for i in range(6):
        # axial column
        a[2, i] = 1.0
        a[3, i] = r * b[i, 0]
        a[4, i] = r * b[i, 1]
        a[5, i] = c * s[i]
        # lateral column
        a[0, 6 + i] = b[i, 0]
        a[1, 6 + i] = b[i, 1]
        a[3, 6 + i] = c * s[i] * b[i, 0]
        a[4, 6 + i] = c * s[i] * b[i, 1]
        a[5, 6 + i] = -r
    return a


class Allocator:
    """Caches the allocation matrix and its pseudo-inverse for one model."""

    def __init__(self, params: VehicleParams, residual_tol: float = 0.1):
        self.params = params
        self.matrix = allocation_matrix(params)
        self.pinv = np.linalg.pinv(self.matrix)
        self.residual_tol = residual_tol

    def decompose(self, wrench) -> np.ndarray:
        """Minimum-norm decomposed forces for a desired body wrench."""
        wrench = np.asarray(wrench, dtype=float)
        return wrench @ self.pinv.T if wrench.ndim > 1 else self.pinv @ wrench

    def allocate(self, wrench, raise_on_infeasible: bool = True) -> AllocationResult:
        wrench = np.asarray(wrench, dtype=float).reshape(6)
        dec = self.pinv @ wrench
        axial, lateral = dec[:6], dec[6:]
        alpha = np.arctan2(lateral, axial)
        f = np.hypot(axial, lateral)
        speed = np.sqrt(f / self.params.k_f)
        speed = np.clip(speed, *self.params.prop_speed_limits)
        force, torque = wrench_components(alpha, speed, self.params)
        residual = np.concatenate([force, torque]) - wrench
        if raise_on_infeasible and np.linalg.norm(residual) > self.residual_tol:
            raise InfeasibleWrenchError(
                f"wrench {wrench} infeasible: post-clip residual norm "
                f"{np.linalg.norm(residual):.3g} N exceeds {self.residual_tol}"
            )
        return AllocationResult(
            alpha_cmd=alpha,
            prop_speed_cmd=speed,
            decomposed_forces=dec,
            residual=residual,
        )

    def posture_reference(self, attitude) -> np.ndarray:
        """alpha_ref for the hover wrench at `attitude` (batched ok).

        Thrust must cancel gravity: F_body = m g R^T z_world, zero torque.
        The magnitude drops out of atan2, so only the body-frame up
        direction matters.
        """
        attitude = np.asarray(attitude, dtype=float)
        up_body = quat.rotate_inv(attitude, np.array([0.0, 0.0, 1.0]))
        p3 = self.pinv[:, :3]  # force rows only; hover torque is zero
        dec = up_body @ p3.T
        return np.arctan2(dec[..., 6:], dec[..., :6])


def allocate(wrench, params: VehicleParams, raise_on_infeasible: bool = True):
    return Allocator(params).allocate(wrench, raise_on_infeasible)


def optimal_posture(wrench, params: VehicleParams) -> np.ndarray:
    """Tilt angles of the minimum-norm allocation of `wrench` (no clipping)."""
    dec = Allocator(params).decompose(np.asarray(wrench, dtype=float).reshape(6))
    return np.arctan2(dec[6:], dec[:6])


def hover_wrench(attitude, params: VehicleParams) -> np.ndarray:
    """Gravity-compensating body wrench at the given attitude."""
    f = params.mass * GRAVITY * quat.rotate_inv(
        np.asarray(attitude, dtype=float), np.array([0.0, 0.0, 1.0])
    )
    return np.concatenate([f, np.zeros(3)])
