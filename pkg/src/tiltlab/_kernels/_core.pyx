# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled physics substep kernel.

Mirrors `numpy_kernels.step_substeps` operation for operation; envs are
independent, so looping env-by-env here matches the vectorized staging
there. Transcendentals come from libm instead of numpy's vector math, so
cross-backend agreement is to rounding, not bitwise.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin, sqrt


cdef inline void _rk4_clamp(double* y, double* v, double target, double wn,
                            double zeta, double dt, double lo, double hi) nogil:
    cdef double w2 = wn * wn
    cdef double tz = 2.0 * zeta * wn
    cdef double y0 = y[0]
    cdef double v0 = v[0]
    cdef double k1y = v0
    cdef double k1v = w2 * (target - y0) - tz * v0
    cdef double y2 = y0 + 0.5 * dt * k1y
    cdef double v2 = v0 + 0.5 * dt * k1v
    cdef double k2v = w2 * (target - y2) - tz * v2
    cdef double y3 = y0 + 0.5 * dt * v2
    cdef double v3 = v0 + 0.5 * dt * k2v
    cdef double k3v = w2 * (target - y3) - tz * v3
    cdef double y4 = y0 + dt * v3
    cdef double v4 = v0 + dt * k3v
    cdef double k4v = w2 * (target - y4) - tz * v4
    cdef double yn = y0 + (dt / 6.0) * (k1y + 2.0 * v2 + 2.0 * v3 + v4)
    cdef double vn = v0 + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    if yn > hi:
        yn = hi
        if vn > 0.0:
            vn = 0.0
    elif yn < lo:
        yn = lo
        if vn < 0.0:
            vn = 0.0
    y[0] = yn
    v[0] = vn


def step_substeps(ar, int n_substeps, double dt):
    """Advance all envs by n_substeps physics steps of length dt (in place)."""
    cdef double[:, ::1] pos = ar.pos
    cdef double[:, ::1] quat = ar.quat
    cdef double[:, ::1] vel = ar.vel
    cdef double[:, ::1] omega = ar.omega
    cdef double[:, ::1] alpha = ar.alpha
    cdef double[:, ::1] alpha_rate = ar.alpha_rate
    cdef double[:, ::1] prop_speed = ar.prop_speed
    cdef double[:, ::1] prop_accel = ar.prop_accel
    cdef double[:, ::1] alpha_target = ar.alpha_target
    cdef double[:, ::1] prop_target = ar.prop_target
    cdef double[:, :, ::1] ring_alpha = ar.ring_alpha
    cdef double[:, :, ::1] ring_prop = ar.ring_prop
    cdef cnp.int64_t[::1] delay = ar.delay_steps
    cdef double[::1] mass = ar.mass
    cdef double[:, :, ::1] inertia = ar.inertia
    cdef double[:, :, ::1] inv_inertia = ar.inv_inertia
    cdef double[:, ::1] com = ar.com
    cdef double[::1] k_f = ar.k_f
    cdef double[::1] k_m = ar.k_m
    cdef double[::1] tilt_wn = ar.tilt_wn
    cdef double[::1] tilt_zeta = ar.tilt_zeta
    cdef double[::1] prop_wn = ar.prop_wn
    cdef double[::1] prop_zeta = ar.prop_zeta
    cdef double[::1] arm_px = ar.arm_px
    cdef double[::1] arm_py = ar.arm_py
    cdef double[::1] tan_x = ar.tan_x
    cdef double[::1] tan_y = ar.tan_y
    cdef double[::1] spin = ar.spin
    cdef double[:, ::1] dist_force = ar.dist_force
    cdef double[:, ::1] dist_torque = ar.dist_torque
    cdef double[:, ::1] ext_force = ar.ext_force
    cdef double[:, ::1] ext_torque = ar.ext_torque

    cdef int K = ar.num_envs
    cdef bint use_delay = ar.use_delay
    cdef int ring_len = ar.ring_len
    cdef int head = ar.ring_head
    cdef double arm_r = ar.arm_radius
    cdef double rotor_r = ar.rotor_radius
    cdef double tilt_lo = ar.tilt_lo
    cdef double tilt_hi = ar.tilt_hi
    cdef double prop_lo = ar.prop_lo
    cdef double prop_hi = ar.prop_hi
    cdef double gravity = ar.gravity
    cdef bint ground = ar.ground_enabled
    cdef double max_gain = ar.ground_max_gain
    cdef double ge_zc = (rotor_r / 4.0) / sqrt(1.0 - 1.0 / max_gain)

    cdef int s, e, i, slot
    cdef double a_t, p_t
    cdef double qw, qx, qy, qz
    cdef double ca, sa, n2, f, drag, zi, ratio, gain
    cdef double fx, fy, fz, tx, ty, tz
    cdef double r20, r21
    cdef double c1, c2, c3, d1, d2, d3
    cdef double fwx, fwy, fwz, inv_m, ax, ay, az, half
    cdef double wx, wy, wz, iwx, iwy, iwz
    cdef double mag, halfang, kfac, dw, dx, dy, dz
    cdef double nw, nx, ny, nz, norm

    with nogil:
        for s in range(n_substeps):
            for e in range(K):
                # actuators through the optional transport delay
                if use_delay:
                    slot = <int>(((head - delay[e]) % ring_len + ring_len) % ring_len)
                    for i in range(6):
                        ring_alpha[e, head, i] = alpha_target[e, i]
                        ring_prop[e, head, i] = prop_target[e, i]
                    for i in range(6):
                        a_t = ring_alpha[e, slot, i]
                        p_t = ring_prop[e, slot, i]
                        _rk4_clamp(&alpha[e, i], &alpha_rate[e, i], a_t,
                                   tilt_wn[e], tilt_zeta[e], dt, tilt_lo, tilt_hi)
                        _rk4_clamp(&prop_speed[e, i], &prop_accel[e, i], p_t,
                                   prop_wn[e], prop_zeta[e], dt, prop_lo, prop_hi)
                else:
                    for i in range(6):
                        _rk4_clamp(&alpha[e, i], &alpha_rate[e, i], alpha_target[e, i],
                                   tilt_wn[e], tilt_zeta[e], dt, tilt_lo, tilt_hi)
                        _rk4_clamp(&prop_speed[e, i], &prop_accel[e, i], prop_target[e, i],
                                   prop_wn[e], prop_zeta[e], dt, prop_lo, prop_hi)

                # rotor wrench
                qw = quat[e, 0]
                qx = quat[e, 1]
                qy = quat[e, 2]
                qz = quat[e, 3]
                r20 = 2.0 * (qx * qz - qw * qy)
                r21 = 2.0 * (qy * qz + qw * qx)
                fx = ext_force[e, 0]
                fy = ext_force[e, 1]
                fz = ext_force[e, 2]
                tx = ext_torque[e, 0]
                ty = ext_torque[e, 1]
                tz = ext_torque[e, 2]
                for i in range(6):
                    ca = cos(alpha[e, i])
                    sa = sin(alpha[e, i])
                    n2 = prop_speed[e, i] * prop_speed[e, i]
                    f = k_f[e] * n2
                    if ground:
                        zi = pos[e, 2] + r20 * arm_px[i] + r21 * arm_py[i]
                        if zi <= ge_zc:
                            gain = max_gain
                        else:
                            ratio = rotor_r / (4.0 * zi)
                            gain = 1.0 / (1.0 - ratio * ratio)
                        f = f * gain
                    drag = spin[i] * k_m[e] * n2
                    fx = fx + f * sa * tan_x[i]
                    fy = fy + f * sa * tan_y[i]
                    fz = fz + f * ca
                    tx = tx + (f * ca * arm_r + drag * sa) * tan_x[i]
                    ty = ty + (f * ca * arm_r + drag * sa) * tan_y[i]
                    tz = tz + (-f * sa * arm_r + drag * ca)

                # transport torque to the center of mass, add disturbances
                tx = tx - (com[e, 1] * fz - com[e, 2] * fy) + dist_torque[e, 0]
                ty = ty - (com[e, 2] * fx - com[e, 0] * fz) + dist_torque[e, 1]
                tz = tz - (com[e, 0] * fy - com[e, 1] * fx) + dist_torque[e, 2]

                # translation
                c1 = qy * fz - qz * fy
                c2 = qz * fx - qx * fz
                c3 = qx * fy - qy * fx
                d1 = qy * c3 - qz * c2
                d2 = qz * c1 - qx * c3
                d3 = qx * c2 - qy * c1
                fwx = fx + 2.0 * (qw * c1 + d1)
                fwy = fy + 2.0 * (qw * c2 + d2)
                fwz = fz + 2.0 * (qw * c3 + d3)
                inv_m = 1.0 / mass[e]
                ax = (fwx + dist_force[e, 0]) * inv_m
                ay = (fwy + dist_force[e, 1]) * inv_m
                az = (fwz + dist_force[e, 2]) * inv_m - gravity
                half = 0.5 * dt * dt
                pos[e, 0] += vel[e, 0] * dt + ax * half
                pos[e, 1] += vel[e, 1] * dt + ay * half
                pos[e, 2] += vel[e, 2] * dt + az * half
                vel[e, 0] += ax * dt
                vel[e, 1] += ay * dt
                vel[e, 2] += az * dt

                # rotation
                wx = omega[e, 0]
                wy = omega[e, 1]
                wz = omega[e, 2]
                iwx = inertia[e, 0, 0] * wx + inertia[e, 0, 1] * wy + inertia[e, 0, 2] * wz
                iwy = inertia[e, 1, 0] * wx + inertia[e, 1, 1] * wy + inertia[e, 1, 2] * wz
                iwz = inertia[e, 2, 0] * wx + inertia[e, 2, 1] * wy + inertia[e, 2, 2] * wz
                tx = tx - (wy * iwz - wz * iwy)
                ty = ty - (wz * iwx - wx * iwz)
                tz = tz - (wx * iwy - wy * iwx)
                wx = wx + dt * (inv_inertia[e, 0, 0] * tx + inv_inertia[e, 0, 1] * ty + inv_inertia[e, 0, 2] * tz)
                wy = wy + dt * (inv_inertia[e, 1, 0] * tx + inv_inertia[e, 1, 1] * ty + inv_inertia[e, 1, 2] * tz)
                wz = wz + dt * (inv_inertia[e, 2, 0] * tx + inv_inertia[e, 2, 1] * ty + inv_inertia[e, 2, 2] * tz)
                omega[e, 0] = wx
                omega[e, 1] = wy
                omega[e, 2] = wz

                mag = sqrt(wx * wx + wy * wy + wz * wz)
                halfang = 0.5 * dt * mag
                if mag < 1e-9:
                    kfac = 0.5 * dt
                else:
                    kfac = sin(halfang) / mag
                dw = cos(halfang)
                dx = wx * kfac
                dy = wy * kfac
                dz = wz * kfac
                nw = qw * dw - qx * dx - qy * dy - qz * dz
                nx = qw * dx + qx * dw + qy * dz - qz * dy
                ny = qw * dy - qx * dz + qy * dw + qz * dx
                nz = qw * dz + qx * dy - qy * dx + qz * dw
                norm = sqrt(nw * nw + nx * nx + ny * ny + nz * nz)
                quat[e, 0] = nw / norm
                quat[e, 1] = nx / norm
                quat[e, 2] = ny / norm
                quat[e, 3] = nz / norm

            if use_delay:
                head = (head + 1) % ring_len

    ar.ring_head = head
