import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tiltlab import quat
from tiltlab.geometry import (
    PoseReference,
    attitude_error,
    geometric_errors,
    velocity_references,
)
from tiltlab.rigidbody import RigidBodyState


def test_zero_errors_at_reference():
    state = RigidBodyState(position=np.array([1.0, 2.0, 3.0]))
    ref = PoseReference(position_ref=np.array([1.0, 2.0, 3.0]))
    e = geometric_errors(state, ref)
    assert np.allclose(e.e_p, 0.0)
    assert np.allclose(e.e_R, 0.0)
    assert np.allclose(e.e_v, 0.0)
    assert np.allclose(e.e_omega, 0.0)


def test_yaw_offset_vee_map():
    # closed form: z-rotation by psi gives e_R = (0, 0, sin psi)
    psi = np.deg2rad(10.0)
    q = quat.from_axis_angle(np.array([0.0, 0.0, 1.0]), psi)
    e_r = attitude_error(q, quat.IDENTITY)
    assert np.allclose(e_r, [0.0, 0.0, np.sin(psi)], atol=1e-9)


def test_antipodal_singularity():
    # 180 deg error degenerates to zero (documented, excluded from scenarios)
    q = quat.from_axis_angle(np.array([1.0, 0.0, 0.0]), np.pi)
    e_r = attitude_error(q, quat.IDENTITY)
    assert np.allclose(e_r, 0.0, atol=1e-12)


def test_matches_matrix_definition(rng):
    # e_R = 1/2 (Rd^T R - R^T Rd)^vee computed with explicit matrices
    for _ in range(50):
        q = quat.normalize(rng.normal(size=4))
        qd = quat.normalize(rng.normal(size=4))
        r, rd = quat.to_matrix(q), quat.to_matrix(qd)
        m = rd.T @ r - r.T @ rd
        vee = 0.5 * np.array([m[2, 1], m[0, 2], m[1, 0]])
        assert np.allclose(attitude_error(q, qd), vee, atol=1e-12)


def test_error_vanishes_iff_aligned(rng):
    # within < 90 deg relative rotation, e_R = 0 only at R = Rd
    for _ in range(200):
        axis = rng.normal(size=3)
        angle = rng.uniform(0.01, np.pi / 2 - 0.01)
        q = quat.from_axis_angle(axis, angle)
        assert np.linalg.norm(attitude_error(q, quat.IDENTITY)) > 1e-4


def test_velocity_reference_values():
    v_ref, w_ref = velocity_references(np.zeros(3), np.zeros(3), 2.0, 2.0)
    assert np.array_equal(v_ref, np.zeros(3))
    # |k e| = 0.5 -> magnitude tanh(0.5)
    v_ref, _ = velocity_references(np.array([0.25, 0.0, 0.0]), np.zeros(3), 2.0, 2.0)
    assert abs(abs(v_ref[0]) - 0.46211715726000974) < 1e-9
    # reference opposes the error
    assert v_ref[0] < 0


def test_velocity_reference_saturates():
    v_ref, w_ref = velocity_references(np.full(3, 1e6), np.full(3, -1e6), 2.0, 2.0)
    assert np.allclose(v_ref, -1.0)
    assert np.allclose(w_ref, 1.0)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3))
def test_velocity_reference_box_and_odd(e):
    e = np.array(e)
    v, _ = velocity_references(e, np.zeros(3), 2.0, 2.0)
    # strictly inside the unit box until float64 tanh saturates (|x| ~ 19)
    assert np.all(np.abs(v) <= 1.0)
    strict = np.abs(2.0 * e) < 19.0
    assert np.all(np.abs(v[strict]) < 1.0)
    v_neg, _ = velocity_references(-e, np.zeros(3), 2.0, 2.0)
    assert np.array_equal(v, -v_neg)


def test_gain_validation():
    with pytest.raises(ValueError):
        velocity_references(np.zeros(3), np.zeros(3), 0.0, 1.0)
