"""The training pipeline: guided initialization, then PPO.

Desk-scale by default (256 envs). The model-based controller is flown
once up front; its commands give both the reference Gaussians for the
actuation-matching loss and a demonstration set that pretrains the
policy mean (guided initialization - the sample-budget analogue of
steering the policy toward the baseline's action distribution). PPO then
improves the policy under full randomization: a few critic-only warmup
updates, then clipped-surrogate updates with a KL drift guard.

Emits periodic checkpoints, a learning-curve CSV with columns
(steps, mean_reward, L_v, L_p, L_a, mean_e_p) and returns the final
policy. A divergence detector aborts when the mean position error stays
5x worse than the best seen for 20 straight updates.
"""

import os
from dataclasses import dataclass, field, replace

import numpy as np

from .baseline import BaselineController
from .checkpoint import load_checkpoint, read_header, save_checkpoint
from .env import EnvConfig, VecEnv
from .losses import LossWeights, ReferenceGaussians, fit_reference_gaussians
from .network import Adam, PolicyNet
from .params import VehicleParams
from .ppo import PPOConfig, ppo_loss_and_grads, ppo_update  # noqa: F401 (re-export)
from .rollout import collect_rollouts, gae_advantages


class TrainingDivergedError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    num_envs: int = 256  # desk scale; the reference setup documents 8192
    horizon: int = 64
    total_steps: int = 2_000_000
    seed: int = 0
    weights: LossWeights = field(default_factory=LossWeights)
    ppo: PPOConfig = field(default_factory=PPOConfig)
    checkpoint_every: int = 50  # updates
    divergence_factor: float = 5.0
    divergence_patience: int = 20
    reference_samples: int = 12_000  # baseline command samples for the KL term
    # guided initialization (0 steps skips it and trains from scratch)
    pretrain_steps: int = 800  # demo policy-steps flown by the baseline
    pretrain_epochs: int = 20
    pretrain_lr: float = 1e-3
    pretrain_noise: float = 0.05  # exploration around the demos
    warmup_updates: int = 6  # critic-only PPO updates before the actor moves
    sigma_init: float = 0.12  # initial action std

    def validate(self):
        if self.num_envs < 1:
            raise ValueError("training.num_envs must be >= 1")
        if self.horizon < 1:
            raise ValueError("training.horizon must be >= 1")
        if self.total_steps < self.num_envs * self.horizon:
            raise ValueError("training.total_steps below one rollout")
        self.weights.validate()
        return self


def fit_reference_from_baseline(nominal: VehicleParams, env_cfg: EnvConfig,
                                seed, min_samples=10_000, num_envs=8) -> ReferenceGaussians:
    """Fly the model-based controller and fit its command distributions."""
    cfg = replace(env_cfg, obs_noise_std=None)
    env = VecEnv(num_envs, nominal, cfg, seed=seed)
    controller = BaselineController(nominal)
    steps = int(np.ceil(min_samples / (6 * num_envs))) + 1
    actions = np.zeros((steps, num_envs, 12))
    for t in range(steps):
        a = controller.act(env)
        actions[t] = a
        env.step(a)
    return fit_reference_gaussians(actions.reshape(-1, 12), min_samples=min_samples)


def _demo_env_config(env_cfg: EnvConfig) -> EnvConfig:
    """Demo-collection env: keep only observation-consistent randomization.

    The teacher's commands are functions of hidden state (integrated
    command targets, thrust coefficient, actuator bandwidths, transport
    delay); whatever of that hidden state varies per episode turns the
    demonstrations into noisy labels the network cannot realize from the
    51-element observation. Mass, inertia, CoM and the attached point
    mass stay randomized (mass reads out through the thrust block);
    k_f, actuator constants and delay are pinned to nominal here and are
    re-randomized during the PPO phase.
    """
    rand = env_cfg.randomization
    if rand is not None:
        rand = replace(
            rand,
            kf_scale=(1.0, 1.0),
            delay_range=(0.0, 0.0),
            tilt_omega_scale=(1.0, 1.0),
            tilt_zeta_scale=(1.0, 1.0),
            prop_omega_scale=(1.0, 1.0),
            prop_zeta_scale=(1.0, 1.0),
        )
    return replace(env_cfg, randomization=rand)


class _DemoTeacher(BaselineController):
    """Demonstration variant: per-env true-mass / CoM feed-forward.

    The evaluation baseline keeps its nominal-model feed-forward (that
    mismatch is the point of the comparison); demonstrations, however,
    should show the *target* behavior - hold the pose on whatever vehicle
    was drawn - so the cloned policy learns to null the velocity errors
    instead of inheriting the baseline's steady mass-mismatch sag.
    """

    def wrench_for(self, env):
        wrench = super().wrench_for(env)
        from . import quat
        from .params import GRAVITY

        # true-mass feed-forward only: mass shows up in the thrust block of
        # the observation, so the clone can realize this correction; the CoM
        # offset does not, and a CoM feed-forward would be pure label noise
        extra = (env.arrays.mass - self.params.mass) * GRAVITY
        up_body = quat.rotate_inv(env.arrays.quat, np.array([0.0, 0.0, 1.0]))
        wrench[:, :3] += extra[:, None] * up_body
        return wrench


def _collect_demos(env, teacher, rollout_controller, t_steps, noise, rng):
    """(obs, teacher label) pairs while `rollout_controller` flies."""
    k = env.num_envs
    obs_buf = np.zeros((t_steps, k, 51), dtype=np.float32)
    act_buf = np.zeros((t_steps, k, 12), dtype=np.float32)
    for t in range(t_steps):
        obs_buf[t] = env.observe()
        label = teacher.act(env)
        act_buf[t] = label
        roll = label if rollout_controller is None else rollout_controller.act(env)
        env.step(np.clip(roll + rng.normal(0.0, noise, label.shape), -1.0, 1.0))
    return obs_buf.reshape(-1, 51), act_buf.reshape(-1, 12)


def _fit_mean(net, x, y, epochs, lr, rng):
    opt = Adam(net.pi.params, lr=lr)
    n = x.shape[0]
    for _ in range(int(epochs)):
        order = rng.permutation(n)
        for start in range(0, n, 2048):
            idx = order[start:start + 2048]
            mean, cache = net.pi.forward(x[idx], want_cache=True)
            err = mean - y[idx]
            grads, _ = net.pi.backward(cache, 2.0 * err / err.size)
            opt.step(net.pi.params, grads)


def pretrain_from_baseline(net: PolicyNet, nominal: VehicleParams,
                           env_cfg: EnvConfig, cfg: TrainConfig,
                           seed, shuffle_rng) -> ReferenceGaussians:
    """Clone demonstrations into the policy mean; fit reference Gaussians.

    Single behavior-cloning round on teacher-flown rollouts (exploration
    noise widens the visited states). A DAgger-style second round is
    deliberately NOT used: while the clone flies, the integrated command
    targets decorrelate from anything observable, and the teacher's
    target-relative corrections turn into label noise that measurably
    corrupts the fit. The same demo commands fit the actuation-matching
    reference Gaussians.
    """
    demo_cfg = _demo_env_config(env_cfg)
    t_steps = int(cfg.pretrain_steps)
    teacher = _DemoTeacher(nominal)

    env = VecEnv(cfg.num_envs, nominal, demo_cfg, seed=seed)
    x1, y1 = _collect_demos(env, teacher, None, t_steps, cfg.pretrain_noise, shuffle_rng)
    reference = fit_reference_gaussians(
        y1, min_samples=min(cfg.reference_samples, y1.shape[0] * 6)
    )
    _fit_mean(net, x1, y1, cfg.pretrain_epochs, cfg.pretrain_lr, shuffle_rng)
    return reference


def _curve_row(steps, stats):
    cols = [steps, stats["mean_reward"], stats["L_v"], stats["L_p"],
            stats["L_a"], stats["mean_e_p"]]
    return ",".join("%d" % c if isinstance(c, (int, np.integer)) else "%.17g" % c
                    for c in cols)


def train(cfg: TrainConfig, nominal: VehicleParams, env_cfg: EnvConfig,
          out_dir, reference: ReferenceGaussians | None = None,
          resume: str | None = None, config_hash=None, quiet=False):
    """Run training; returns (net, curve rows as list of dicts)."""
    cfg.validate()
    os.makedirs(out_dir, exist_ok=True)
    master = np.random.SeedSequence(cfg.seed)
    ss_envs, ss_net, ss_actions, ss_shuffle, ss_ref = master.spawn(5)

    env = VecEnv(cfg.num_envs, nominal, env_cfg, seed_seqs=ss_envs.spawn(cfg.num_envs))
    action_rng = np.random.Generator(np.random.PCG64(ss_actions))
    shuffle_rng = np.random.Generator(np.random.PCG64(ss_shuffle))

    steps_done = 0
    warmup_left = cfg.warmup_updates
    if resume:
        net = load_checkpoint(resume)
        hdr, _ = read_header(resume)
        steps_done = int(hdr.get("extra", {}).get("train_steps", 0) or 0)
        warmup_left = 0
        if reference is None and cfg.weights.w_a > 0.0:
            reference = fit_reference_from_baseline(
                nominal, env_cfg, seed=ss_ref, min_samples=cfg.reference_samples,
            )
    else:
        net = PolicyNet(rng=np.random.Generator(np.random.PCG64(ss_net)))
        net.log_std[:] = np.log(cfg.sigma_init)
        if cfg.pretrain_steps > 0:
            pre_rng = np.random.Generator(np.random.PCG64(ss_ref))
            fitted = pretrain_from_baseline(net, nominal, env_cfg, cfg, ss_ref, pre_rng)
            if reference is None:
                reference = fitted
        elif reference is None and cfg.weights.w_a > 0.0:
            reference = fit_reference_from_baseline(
                nominal, env_cfg, seed=ss_ref, min_samples=cfg.reference_samples,
            )
    optimizer = Adam(net.params, lr=cfg.ppo.learning_rate)

    steps_per_update = cfg.num_envs * cfg.horizon
    curve_path = os.path.join(out_dir, "curve.csv")
    curve = []
    best_ep = np.inf
    bad_streak = 0
    update = 0
    mode = "a" if (resume and os.path.exists(curve_path)) else "w"
    with open(curve_path, mode) as curve_fh:
        if mode == "w":
            curve_fh.write("steps,mean_reward,L_v,L_p,L_a,mean_e_p\n")
        while steps_done < cfg.total_steps:
            buf = collect_rollouts(
                net, env, cfg.horizon, action_rng, cfg.weights, reference,
                cfg.ppo.gamma,
            )
            adv, ret = gae_advantages(
                buf.rewards, buf.values, buf.dones, buf.last_values,
                cfg.ppo.gamma, cfg.ppo.lam,
            )
            up_stats = ppo_update(
                net, optimizer, buf, adv, ret, cfg.ppo, shuffle_rng,
                policy_scale=0.0 if warmup_left > 0 else 1.0,
            )
            warmup_left = max(0, warmup_left - 1)
            steps_done += steps_per_update
            update += 1

            stats = {
                "mean_reward": float(buf.rewards.mean()),
                "L_v": float(buf.loss_vel.mean()),
                "L_p": float(buf.loss_posture.mean()),
                "L_a": float(buf.loss_actuation),
                "mean_e_p": float(buf.e_p_norm.mean()),
            }
            stats.update(up_stats)
            curve.append({"steps": steps_done, **stats})
            curve_fh.write(_curve_row(steps_done, stats) + "\n")
            curve_fh.flush()
            if not quiet:
                print(
                    f"update {update:4d}  steps {steps_done:9d}  "
                    f"reward {stats['mean_reward']:8.3f}  L_v {stats['L_v']:6.3f}  "
                    f"e_p {stats['mean_e_p']:6.3f}"
                )

            if stats["mean_e_p"] < best_ep:
                best_ep = stats["mean_e_p"]
                bad_streak = 0
            elif stats["mean_e_p"] > cfg.divergence_factor * best_ep:
                bad_streak += 1
                if bad_streak >= cfg.divergence_patience:
                    save_checkpoint(
                        net, os.path.join(out_dir, "diverged.ckpt"),
                        seed=cfg.seed, config_hash=config_hash,
                        extra={"train_steps": steps_done, "diverged": True},
                    )
                    raise TrainingDivergedError(
                        f"mean position error {stats['mean_e_p']:.3f} m stayed "
                        f">{cfg.divergence_factor}x the best ({best_ep:.3f} m) for "
                        f"{cfg.divergence_patience} consecutive updates"
                    )
            else:
                bad_streak = 0

            if cfg.checkpoint_every and update % cfg.checkpoint_every == 0:
                save_checkpoint(
                    net, os.path.join(out_dir, f"update_{update:05d}.ckpt"),
                    seed=cfg.seed, config_hash=config_hash,
                    extra={"train_steps": steps_done},
                )

    save_checkpoint(
        net, os.path.join(out_dir, "final.ckpt"),
        seed=cfg.seed, config_hash=config_hash,
        extra={"train_steps": steps_done},
    )
    return net, curve
