#!/usr/bin/env python3
"""Regenerate tests/data/golden_obs.json.

Computes the expected 51-element observation for a fixed environment
state using scipy's Rotation class and plain formulas, independently of
the package's own observation assembly. Run from the repo root:

    python3 scripts/gen_golden_obs.py
"""

import json
import os

import numpy as np
from scipy.spatial.transform import Rotation

GRAVITY = 9.81

FIXTURE = {
    "position": [0.3, -0.2, 1.2],
    "reference_position": [0.0, 0.0, 1.5],
    "attitude_wxyz": list(
        (np.array([0.9, 0.1, -0.15, 0.2]) / np.linalg.norm([0.9, 0.1, -0.15, 0.2])).tolist()
    ),
    "reference_attitude_wxyz": [1.0, 0.0, 0.0, 0.0],
    "lin_vel": [0.2, -0.1, 0.05],
    "ang_vel": [0.1, 0.2, -0.3],
    "alpha": [0.1, -0.2, 0.3, -0.4, 0.5, -0.6],
    "prop_speed": [700.0, 750.0, 800.0, 850.0, 900.0, 950.0],
    "prev_action": [0.05 * i - 0.3 for i in range(12)],
    "prev_vel_errors": [0.01, -0.02, 0.03, -0.04, 0.05, -0.06],
    "k_p": 2.0,
    "k_R": 2.0,
    "nominal_mass": 4.0,
    "k_f": 1.2e-5,
}


def scipy_rot(q_wxyz):
    w, x, y, z = q_wxyz
    return Rotation.from_quat([x, y, z, w])  # scipy is scalar-last


def main():
    f = {k: np.array(v) if isinstance(v, list) else v for k, v in FIXTURE.items()}
    r = scipy_rot(f["attitude_wxyz"])
    r_ref = scipy_rot(f["reference_attitude_wxyz"])

    obs = np.zeros(51)
    obs[0:6] = np.sin(f["alpha"])
    obs[6:12] = np.cos(f["alpha"])
    obs[12:18] = f["k_f"] * f["prop_speed"] ** 2 / (f["nominal_mass"] * GRAVITY / 6.0)

    e_p_world = f["position"] - f["reference_position"]
    obs[18:21] = r.inv().apply(e_p_world)

    m = r_ref.as_matrix().T @ r.as_matrix() - r.as_matrix().T @ r_ref.as_matrix()
    e_r = 0.5 * np.array([m[2, 1], m[0, 2], m[1, 0]])
    obs[21:24] = e_r

    v_ref = np.tanh(-f["k_p"] * e_p_world)
    obs[24:27] = r.inv().apply(f["lin_vel"] - v_ref)
    w_ref = np.tanh(-f["k_R"] * e_r)
    obs[27:30] = f["ang_vel"] - w_ref

    obs[30:36] = f["prev_vel_errors"]
    obs[36:39] = r.inv().apply([0.0, 0.0, -1.0])
    obs[39:51] = f["prev_action"]

    out = {
        "fixture": {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in FIXTURE.items()},
        "expected_obs": ["%.17g" % v for v in obs],
    }
    path = os.path.join(os.path.dirname(__file__), "..", "tests", "data", "golden_obs.json")
    with open(os.path.abspath(path), "w") as fh:
        json.dump(out, fh, indent=1)
        fh.write("\n")
    print(f"wrote {os.path.abspath(path)}")


if __name__ == "__main__":
    main()
