"""Quaternion and rotation helpers.

Convention: scalar-first unit quaternions q = [w, x, y, z] encoding the
world-from-body rotation, i.e. ``rotate(q, v_body) -> v_world``.

All functions broadcast over leading batch dimensions and are written as
unrolled component arithmetic. That keeps results bitwise identical
whether a state is stepped alone or inside a batch, which the simulator's
determinism contract relies on.
"""

import numpy as np

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


def normalize(q):
    """Return q scaled to unit norm (last axis)."""
    n = np.sqrt(q[..., 0] ** 2 + q[..., 1] ** 2 + q[..., 2] ** 2 + q[..., 3] ** 2)
    return q / n[..., None]


def multiply(q1, q2):
    """Hamilton product q1 * q2 (compose rotations: first q2, then q1)."""
    w1, x1, y1, z1 = q1[..., 0], q1[..., 1], q1[..., 2], q1[..., 3]
    w2, x2, y2, z2 = q2[..., 0], q2[..., 1], q2[..., 2], q2[..., 3]
    return np.stack(
        [
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ],
        axis=-1,
    )


def conjugate(q):
    out = np.array(q, copy=True)
    out[..., 1:] = -out[..., 1:]
    return out


def rotate(q, v):
    """Rotate body-frame vectors into the world frame: v' = R(q) v."""
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    vx, vy, vz = v[..., 0], v[..., 1], v[..., 2]
    # v' = v + 2 w (u x v) + 2 u x (u x v), u = (x, y, z)
    cx = y * vz - z * vy
    cy = z * vx - x * vz
    cz = x * vy - y * vx
    dx = y * cz - z * cy
    dy = z * cx - x * cz
    dz = x * cy - y * cx
    return np.stack(
        [vx + 2.0 * (w * cx + dx), vy + 2.0 * (w * cy + dy), vz + 2.0 * (w * cz + dz)],
        axis=-1,
    )


def rotate_inv(q, v):
    """Rotate world-frame vectors into the body frame: v' = R(q)^T v."""
    return rotate(conjugate(q), v)


def to_matrix(q):
    """World-from-body rotation matrix, shape (..., 3, 3)."""
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    r = np.empty(q.shape[:-1] + (3, 3), dtype=q.dtype)
    r[..., 0, 0] = 1.0 - 2.0 * (y * y + z * z)
    r[..., 0, 1] = 2.0 * (x * y - w * z)
    r[..., 0, 2] = 2.0 * (x * z + w * y)
    r[..., 1, 0] = 2.0 * (x * y + w * z)
    r[..., 1, 1] = 1.0 - 2.0 * (x * x + z * z)
    r[..., 1, 2] = 2.0 * (y * z - w * x)
    r[..., 2, 0] = 2.0 * (x * z - w * y)
    r[..., 2, 1] = 2.0 * (y * z + w * x)
    r[..., 2, 2] = 1.0 - 2.0 * (x * x + y * y)
    return r


def from_axis_angle(axis, angle):
    """Unit quaternion for a rotation of `angle` radians about `axis`."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis, axis=-1, keepdims=True)
    angle = np.asarray(angle, dtype=float)
    half = 0.5 * angle
    s = np.sin(half)
    return np.stack(
        [np.cos(half), axis[..., 0] * s, axis[..., 1] * s, axis[..., 2] * s], axis=-1
    )


def integrate(q, omega, dt):
    """Advance q by body rate omega held constant for dt (exponential map).

    Exact for constant omega; the result is renormalized so the unit-norm
    invariant holds to machine precision every step.
    """
    wx, wy, wz = omega[..., 0], omega[..., 1], omega[..., 2]
    mag = np.sqrt(wx * wx + wy * wy + wz * wz)
    half = 0.5 * dt * mag
    # sin(half)/mag, series fallback below the switch point (same branch in
    # the compiled kernel keeps backends consistent)
    small = mag < 1e-9
    safe = np.where(small, 1.0, mag)
    k = np.where(small, 0.5 * dt, np.sin(half) / safe)
    dq = np.stack([np.cos(half), wx * k, wy * k, wz * k], axis=-1)
    return normalize(multiply(q, dq))
