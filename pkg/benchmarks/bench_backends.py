#!/usr/bin/env python3
"""Compare the compiled and pure-numpy physics kernels.

    python3 benchmarks/bench_backends.py [--envs 256] [--steps 200]

Reports env-steps/s for each backend on the same workload and the
state-agreement error between them after the run.
"""

import argparse
import time

import numpy as np

from tiltlab._kernels import numpy_kernels
from tiltlab.env import DisturbanceConfig, EnvConfig, VecEnv
from tiltlab.params import VehicleParams

try:
    from tiltlab._kernels import _core
except ImportError:
    _core = None


def build_env(num_envs, seed=0):
    p = VehicleParams().validate()
    cfg = EnvConfig(disturbance=DisturbanceConfig(force_range=2.0), episode_time_limit=0.0)
    return VecEnv(num_envs, p, cfg, seed=seed)


def run(kernel, num_envs, steps, actions):
    import tiltlab.env as env_mod

    env = build_env(num_envs)
    orig = env_mod.step_substeps
    env_mod.step_substeps = kernel
    try:
        t0 = time.perf_counter()
        for t in range(steps):
            env.step(actions[t])
        elapsed = time.perf_counter() - t0
    finally:
        env_mod.step_substeps = orig
    return env, elapsed


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--envs", type=int, default=256)
    ap.add_argument("--steps", type=int, default=200)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    actions = rng.uniform(-0.5, 0.5, (args.steps, args.envs, 12))
    results = {}

    env_np, t_np = run(numpy_kernels.step_substeps, args.envs, args.steps, actions)
    results["python"] = (env_np, t_np)
    print(f"python   backend: {args.envs * args.steps / t_np:10,.0f} env-steps/s "
          f"({t_np / args.steps * 1e3:6.2f} ms/policy step)")

    if _core is None:
        print("compiled backend: not built (pip install -e . with a C compiler)")
        return

    env_c, t_c = run(_core.step_substeps, args.envs, args.steps, actions)
    results["compiled"] = (env_c, t_c)
    print(f"compiled backend: {args.envs * args.steps / t_c:10,.0f} env-steps/s "
          f"({t_c / args.steps * 1e3:6.2f} ms/policy step)")
    print(f"speedup: {t_np / t_c:.2f}x")

    err = max(
        np.abs(env_np.arrays.pos - env_c.arrays.pos).max(),
        np.abs(env_np.arrays.quat - env_c.arrays.quat).max(),
        np.abs(env_np.arrays.prop_speed - env_c.arrays.prop_speed).max(
        ) / 1000.0,
    )
    print(f"state agreement after {args.steps} steps: max err {err:.3g}")


if __name__ == "__main__":
    main()
