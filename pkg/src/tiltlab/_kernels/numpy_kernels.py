"""Pure-numpy physics substep loop (reference backend).

Vectorized over environments but written strictly elementwise per env so
a batch of K steps bitwise-identically to K separate single-env steps.
The compiled kernel in `_core.pyx` mirrors this operation order; the two
agree to float rounding (transcendental libraries differ in the last ulp,
so cross-backend equality is tolerance-based, not bitwise).
"""

import numpy as np


def _rk4_pair(y, v, target, wn, zeta, dt):
    w2 = wn * wn
    tz = 2.0 * zeta * wn
    k1y = v
    k1v = w2 * (target - y) - tz * v
    y2 = y + 0.5 * dt * k1y
    v2 = v + 0.5 * dt * k1v
    k2v = w2 * (target - y2) - tz * v2
    y3 = y + 0.5 * dt * v2
    v3 = v + 0.5 * dt * k2v
    k3v = w2 * (target - y3) - tz * v3
    y4 = y + dt * v3
    v4 = v + dt * k3v
    k4v = w2 * (target - y4) - tz * v4
    y_new = y + (dt / 6.0) * (k1y + 2.0 * v2 + 2.0 * v3 + v4)
    v_new = v + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return y_new, v_new


def _clamp_pair(y, v, lo, hi):
    over = y > hi
    under = y < lo
    y = np.where(over, hi, np.where(under, lo, y))
    v = np.where(over & (v > 0.0), 0.0, np.where(under & (v < 0.0), 0.0, v))
    return y, v


def step_substeps(ar, n_substeps, dt):
    """Advance all envs by n_substeps physics steps of length dt (in place)."""
    k = ar.num_envs
    idx_k = np.arange(k)
    ge_zc = (ar.rotor_radius / 4.0) / np.sqrt(1.0 - 1.0 / ar.ground_max_gain)

    for _ in range(int(n_substeps)):
        # effective targets through the transport-delay ring
        if ar.use_delay:
            h = ar.ring_head
            ar.ring_alpha[:, h, :] = ar.alpha_target
            ar.ring_prop[:, h, :] = ar.prop_target
            slot = (h - ar.delay_steps) % ar.ring_len
            a_t = ar.ring_alpha[idx_k, slot, :]
            p_t = ar.ring_prop[idx_k, slot, :]
            ar.ring_head = (h + 1) % ar.ring_len
        else:
            a_t = ar.alpha_target
            p_t = ar.prop_target

        # actuator banks, RK4 + clamp
        al, alr = _rk4_pair(
            ar.alpha, ar.alpha_rate, a_t, ar.tilt_wn[:, None], ar.tilt_zeta[:, None], dt
        )
        al, alr = _clamp_pair(al, alr, ar.tilt_lo, ar.tilt_hi)
        ns, na = _rk4_pair(
            ar.prop_speed, ar.prop_accel, p_t,
            ar.prop_wn[:, None], ar.prop_zeta[:, None], dt,
        )
        ns, na = _clamp_pair(ns, na, ar.prop_lo, ar.prop_hi)
        ar.alpha, ar.alpha_rate = al, alr
        ar.prop_speed, ar.prop_accel = ns, na

        # body wrench from the six rotors
        qw, qx, qy, qz = ar.quat[:, 0], ar.quat[:, 1], ar.quat[:, 2], ar.quat[:, 3]
        ca = np.cos(al)
        sa = np.sin(al)
        n2 = ns * ns
        f = ar.k_f[:, None] * n2
        if ar.ground_enabled:
            r20 = 2.0 * (qx * qz - qw * qy)
            r21 = 2.0 * (qy * qz + qw * qx)
            z_i = (
                ar.pos[:, 2][:, None]
                + r20[:, None] * ar.arm_px[None, :]
                + r21[:, None] * ar.arm_py[None, :]
            )
            ratio = ar.rotor_radius / (4.0 * np.maximum(z_i, ge_zc))
            gain = np.where(z_i <= ge_zc, ar.ground_max_gain, 1.0 / (1.0 - ratio * ratio))
            f = f * gain
        drag = ar.spin[None, :] * ar.k_m[:, None] * n2
        rr = ar.arm_radius
        fx = np.sum(f * sa * ar.tan_x[None, :], axis=1) + ar.ext_force[:, 0]
        fy = np.sum(f * sa * ar.tan_y[None, :], axis=1) + ar.ext_force[:, 1]
        fz = np.sum(f * ca, axis=1) + ar.ext_force[:, 2]
        tx = np.sum((f * ca * rr + drag * sa) * ar.tan_x[None, :], axis=1) + ar.ext_torque[:, 0]
        ty = np.sum((f * ca * rr + drag * sa) * ar.tan_y[None, :], axis=1) + ar.ext_torque[:, 1]
        tz = np.sum(-f * sa * rr + drag * ca, axis=1) + ar.ext_torque[:, 2]
        # torque transport to the (possibly offset) center of mass
        cx, cy, cz = ar.com[:, 0], ar.com[:, 1], ar.com[:, 2]
        tx = tx - (cy * fz - cz * fy) + ar.dist_torque[:, 0]
        ty = ty - (cz * fx - cx * fz) + ar.dist_torque[:, 1]
        tz = tz - (cx * fy - cy * fx) + ar.dist_torque[:, 2]

        # translation: rotate force to world, exact constant-acceleration step
        c1 = qy * fz - qz * fy
        c2 = qz * fx - qx * fz
        c3 = qx * fy - qy * fx
        d1 = qy * c3 - qz * c2
        d2 = qz * c1 - qx * c3
        d3 = qx * c2 - qy * c1
        fwx = fx + 2.0 * (qw * c1 + d1)
        fwy = fy + 2.0 * (qw * c2 + d2)
        fwz = fz + 2.0 * (qw * c3 + d3)
        inv_m = 1.0 / ar.mass
        ax = (fwx + ar.dist_force[:, 0]) * inv_m
        ay = (fwy + ar.dist_force[:, 1]) * inv_m
        az = (fwz + ar.dist_force[:, 2]) * inv_m - ar.gravity
        half = 0.5 * dt * dt
        ar.pos[:, 0] += ar.vel[:, 0] * dt + ax * half
        ar.pos[:, 1] += ar.vel[:, 1] * dt + ay * half
        ar.pos[:, 2] += ar.vel[:, 2] * dt + az * half
        ar.vel[:, 0] += ax * dt
        ar.vel[:, 1] += ay * dt
        ar.vel[:, 2] += az * dt

        # rotation: tau - w x I w, explicit omega update, quat exponential
        wx, wy, wz = ar.omega[:, 0], ar.omega[:, 1], ar.omega[:, 2]
        ii = ar.inertia
        iwx = ii[:, 0, 0] * wx + ii[:, 0, 1] * wy + ii[:, 0, 2] * wz
        iwy = ii[:, 1, 0] * wx + ii[:, 1, 1] * wy + ii[:, 1, 2] * wz
        iwz = ii[:, 2, 0] * wx + ii[:, 2, 1] * wy + ii[:, 2, 2] * wz
        tx = tx - (wy * iwz - wz * iwy)
        ty = ty - (wz * iwx - wx * iwz)
        tz = tz - (wx * iwy - wy * iwx)
        inv = ar.inv_inertia
        wx = wx + dt * (inv[:, 0, 0] * tx + inv[:, 0, 1] * ty + inv[:, 0, 2] * tz)
        wy = wy + dt * (inv[:, 1, 0] * tx + inv[:, 1, 1] * ty + inv[:, 1, 2] * tz)
        wz = wz + dt * (inv[:, 2, 0] * tx + inv[:, 2, 1] * ty + inv[:, 2, 2] * tz)
        ar.omega[:, 0] = wx
        ar.omega[:, 1] = wy
        ar.omega[:, 2] = wz

        mag = np.sqrt(wx * wx + wy * wy + wz * wz)
        halfang = 0.5 * dt * mag
        small = mag < 1e-9
        kfac = np.where(small, 0.5 * dt, np.sin(halfang) / np.where(small, 1.0, mag))
        dw = np.cos(halfang)
        dx = wx * kfac
        dy = wy * kfac
        dz = wz * kfac
        nw = qw * dw - qx * dx - qy * dy - qz * dz
        nx = qw * dx + qx * dw + qy * dz - qz * dy
        ny = qw * dy - qx * dz + qy * dw + qz * dx
        nz = qw * dz + qx * dy - qy * dx + qz * dw
        norm = np.sqrt(nw * nw + nx * nx + ny * ny + nz * nz)
        ar.quat[:, 0] = nw / norm
        ar.quat[:, 1] = nx / norm
        ar.quat[:, 2] = ny / norm
        ar.quat[:, 3] = nz / norm
