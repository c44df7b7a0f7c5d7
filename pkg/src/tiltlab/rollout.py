"""Rollout storage, collection and generalized advantage estimation."""

from dataclasses import dataclass

import numpy as np

from .losses import LossWeights, ReferenceGaussians, actuation_kl, step_losses
from .network import PolicyNet
from .policy import sample_and_clip


@dataclass
class RolloutBuffer:
    """Rectangular (horizon, num_envs) rollout record."""

    obs: np.ndarray  # (T, K, 51) float32
    actions: np.ndarray  # (T, K, 12) raw pre-clip samples
    log_probs: np.ndarray  # (T, K)
    rewards: np.ndarray  # (T, K) final per-step rewards
    values: np.ndarray  # (T, K)
    dones: np.ndarray  # (T, K) bool: transition t ended its episode
    last_values: np.ndarray  # (K,) bootstrap for the open episodes
    # logged decomposition (reward = -(w_v L_v + w_p L_p + w_a L_a) - crash)
    loss_vel: np.ndarray  # (T, K)
    loss_posture: np.ndarray  # (T, K)
    loss_actuation: float  # batch KL, amortized uniformly per step
    crash_penalty: np.ndarray  # (T, K) zero or w_crash at failure steps
    e_p_norm: np.ndarray  # (T, K) diagnostic

    @property
    def horizon(self):
        return self.rewards.shape[0]

    @property
    def num_envs(self):
        return self.rewards.shape[1]


def collect_rollouts(
    net: PolicyNet,
    env,
    horizon: int,
    rng: np.random.Generator,
    weights: LossWeights,
    reference: ReferenceGaussians | None,
    gamma: float,
) -> RolloutBuffer:
    """Run the stochastic policy for `horizon` steps across all envs.

    Episodes auto-reset inside the env. Failure terminations take the
    crash penalty; time-limit truncations bootstrap the (noiseless)
    terminal value into the reward so hovering out the clock is never
    penalized relative to early exit.
    """
    k = env.num_envs
    t_steps = int(horizon)
    dtype = net.log_std.dtype
    obs_buf = np.zeros((t_steps, k, 51), dtype=np.float32)
    act_buf = np.zeros((t_steps, k, 12), dtype=np.float64)
    mean_buf = np.zeros((t_steps, k, 12), dtype=np.float64)
    logp_buf = np.zeros((t_steps, k), dtype=np.float64)
    rew_buf = np.zeros((t_steps, k), dtype=np.float64)
    val_buf = np.zeros((t_steps, k), dtype=np.float64)
    done_buf = np.zeros((t_steps, k), dtype=bool)
    lv_buf = np.zeros((t_steps, k), dtype=np.float64)
    lp_buf = np.zeros((t_steps, k), dtype=np.float64)
    crash_buf = np.zeros((t_steps, k), dtype=np.float64)
    ep_buf = np.zeros((t_steps, k), dtype=np.float64)

    for t in range(t_steps):
        obs = env.observe()
        mean, value = net.forward(obs.astype(dtype))
        mean = mean.astype(np.float64)
        clipped, raw, logp = sample_and_clip(mean, net.log_std.astype(np.float64), rng)
        info = env.step(clipped)

        l_v, l_p, reward = step_losses(info, weights)
        crash = np.where(info.terminated, weights.w_crash, 0.0)
        reward = reward - crash
        if np.any(info.truncated):
            _, boot = net.forward(info.terminal_obs.astype(dtype))
            reward = reward + np.where(info.truncated, gamma * boot.astype(np.float64), 0.0)

        obs_buf[t] = obs
        act_buf[t] = raw
        mean_buf[t] = mean
        logp_buf[t] = logp
        rew_buf[t] = reward
        val_buf[t] = value.astype(np.float64)
        done_buf[t] = info.terminated | info.truncated
        lv_buf[t] = l_v
        lp_buf[t] = l_p
        crash_buf[t] = crash
        ep_buf[t] = np.linalg.norm(info.e_p, axis=1)

    _, last_values = net.forward(env.observe(noise=False).astype(dtype))

    kl = 0.0
    if reference is not None and weights.w_a > 0.0:
        kl = float(actuation_kl(reference, mean_buf, np.exp(net.log_std.astype(np.float64))))
        rew_buf -= weights.w_a * kl

    return RolloutBuffer(
        obs=obs_buf,
        actions=act_buf,
        log_probs=logp_buf,
        rewards=rew_buf,
        values=val_buf,
        dones=done_buf,
        last_values=last_values.astype(np.float64),
        loss_vel=lv_buf,
        loss_posture=lp_buf,
        loss_actuation=kl,
        crash_penalty=crash_buf,
        e_p_norm=ep_buf,
    )


def gae_advantages(rewards, values, dones, last_values, gamma, lam):
    """Raw (unnormalized) GAE advantages and returns.

    dones[t] marks that transition t ended its episode, so no value
    bootstraps across it (truncation bootstraps are already folded into
    the rewards at collection time). Normalization to zero mean / unit
    std happens once per PPO update, not here, so the discounted-sum
    oracle can check these numbers directly.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=bool)
    t_steps = rewards.shape[0]
    adv = np.zeros_like(rewards)
    lastgae = np.zeros(rewards.shape[1])
    for t in range(t_steps - 1, -1, -1):
        nonterminal = 1.0 - dones[t].astype(np.float64)
        next_values = values[t + 1] if t < t_steps - 1 else np.asarray(last_values)
        delta = rewards[t] + gamma * next_values * nonterminal - values[t]
        lastgae = delta + gamma * lam * nonterminal * lastgae
        adv[t] = lastgae
    return adv, adv + values
