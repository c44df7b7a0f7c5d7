"""Clipped-surrogate policy optimization on the hand-rolled networks.

The objective per minibatch is

    L = -mean(min(r A, clip(r, 1-e, 1+e) A))
        + value_coef * 0.5 * mean((V - R)^2)
        - entropy_coef * H(pi)

with r the likelihood ratio on the raw (pre-clip) actions. Gradients are
assembled analytically: the Gaussian log-density differentiates into the
action-mean head and the log-std vector, the value MSE into the value
net, and the entropy bonus into log-std alone. The min() picks the
unclipped branch wherever it attains the minimum; on the strictly
clipped side the gradient is exactly zero.
"""

from dataclasses import dataclass

import numpy as np

from .network import Adam, PolicyNet, clip_grad_norm, gaussian_entropy

DUAL_CLIP = 3.0  # ratio floor factor for negative advantages
ADV_CLAMP = 5.0  # normalized-advantage outlier bound (crash-penalty spikes)


@dataclass
class PPOConfig:
    clip_eps: float = 0.2
    epochs: int = 5
    minibatch: int = 4096
    learning_rate: float = 3e-4
    gamma: float = 0.99
    lam: float = 0.95
    value_coef: float = 0.5
    entropy_coef: float = 0.0
    max_grad_norm: float = 1.0
    target_kl: float = 0.05  # past this the sweep updates only the critic; 0 disables


def ppo_loss_and_grads(net: PolicyNet, obs, actions, old_logp, advantages,
                       returns, clip_eps, value_coef, entropy_coef):
    """Objective value, diagnostics and analytic parameter gradients.

    Everything is computed in the dtype of `obs` (float64 in the
    finite-difference tests, float32 in training).
    """
    obs = np.asarray(obs)
    dtype = obs.dtype
    actions = np.asarray(actions, dtype=dtype)
    old_logp = np.asarray(old_logp, dtype=dtype)
    advantages = np.asarray(advantages, dtype=dtype)
    returns = np.asarray(returns, dtype=dtype)
    b = obs.shape[0]

    from .network import LOG_2PI

    mean, cache_pi = net.pi.forward(obs, want_cache=True)
    log_std = net.log_std.astype(dtype)
    std = np.exp(log_std)
    z = (actions - mean) / std
    logp = (
        -0.5 * np.sum(z * z, axis=-1)
        - float(np.sum(log_std))
        - 0.5 * actions.shape[-1] * LOG_2PI
    )
    ratio = np.exp(logp - old_logp)
    unclipped = ratio * advantages
    clipped = np.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * advantages
    surrogate = np.minimum(unclipped, clipped)
    # dual clip: on negative advantages the unclipped branch is unbounded
    # below, which lets far-off-policy samples blow up the step; floor it
    dual = DUAL_CLIP * advantages
    dual_active = (advantages < 0.0) & (surrogate < dual)
    surrogate = np.where(dual_active, dual, surrogate)
    policy_loss = -float(np.mean(surrogate))

    # d(-surrogate)/d logp: active only where the unclipped branch is the min
    # and the dual-clip floor is not engaged
    active = (unclipped <= clipped) & ~dual_active
    glogp = np.where(active, -advantages * ratio, 0.0) / b
    dmean = glogp[:, None] * (z / std)  # d logp/d mean = z / std
    grad_log_std_pi = np.sum(glogp[:, None] * (z * z - 1.0), axis=0)
    grads_pi, _ = net.pi.backward(cache_pi, dmean)

    values, cache_v = net.vf.forward(obs, want_cache=True)
    v = values[:, 0]
    value_loss = 0.5 * float(np.mean((v - returns) ** 2))
    dv = (value_coef * (v - returns) / b)[:, None]
    grads_vf, _ = net.vf.backward(cache_v, dv)

    entropy = gaussian_entropy(log_std)
    grad_log_std = grad_log_std_pi - entropy_coef * np.ones_like(log_std)

    loss = policy_loss + value_coef * value_loss - entropy_coef * entropy
    grads = grads_pi + [grad_log_std] + grads_vf
    stats = {
        "loss": float(loss),
        "policy_loss": policy_loss,
        "value_loss": value_loss,
        "entropy": entropy,
        "approx_kl": float(np.mean(old_logp - logp)),
        "clip_fraction": float(np.mean(~active)),
    }
    return stats, grads


def ppo_update(net: PolicyNet, optimizer: Adam, buffer, advantages, returns,
               cfg: PPOConfig, rng: np.random.Generator, policy_scale: float = 1.0):
    """Run the epoch/minibatch sweep over one rollout buffer (in place).

    Advantages are normalized to zero mean / unit std here, once per
    update. Non-finite gradients skip the step and are counted.
    `policy_scale=0` freezes the policy (value-warmup phase: the critic
    fits the return landscape before the actor starts moving).
    """
    t, k = buffer.rewards.shape
    obs = buffer.obs.reshape(t * k, -1).astype(net.log_std.dtype)
    actions = buffer.actions.reshape(t * k, -1)
    old_logp = buffer.log_probs.reshape(t * k)
    adv = advantages.reshape(t * k)
    adv = (adv - adv.mean()) / (adv.std() + 1e-8)
    adv = np.clip(adv, -ADV_CLAMP, ADV_CLAMP)
    ret = returns.reshape(t * k)

    n = t * k
    mb = min(cfg.minibatch, n)
    stats_acc = []
    skipped = 0
    policy_live = policy_scale
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, mb):
            idx = order[start:start + mb]
            stats, grads = ppo_loss_and_grads(
                net, obs[idx], actions[idx], old_logp[idx], adv[idx], ret[idx],
                cfg.clip_eps, cfg.value_coef, cfg.entropy_coef,
            )
            if not all(np.all(np.isfinite(g)) for g in grads):
                skipped += 1
                continue
            # policy drift guard: past target_kl only the critic keeps
            # stepping for the rest of the sweep
            if cfg.target_kl and stats["approx_kl"] > cfg.target_kl:
                policy_live = 0.0
            # clip the policy and value groups separately: value-loss
            # magnitudes must not scale the policy step down
            n_pi = len(net.pi.params) + 1  # + log_std
            g_pi, norm_pi = clip_grad_norm(grads[:n_pi], cfg.max_grad_norm)
            g_vf, norm_vf = clip_grad_norm(grads[n_pi:], cfg.max_grad_norm)
            if policy_live != 1.0:
                g_pi = [g * policy_live for g in g_pi]
            optimizer.step(net.params, g_pi + g_vf)
            net.clamp_log_std()
            stats["grad_norm"] = norm_pi
            stats["value_grad_norm"] = norm_vf
            stats["policy_frozen"] = float(policy_live == 0.0)
            stats_acc.append(stats)

    out = {key: float(np.mean([s[key] for s in stats_acc])) for key in stats_acc[0]}
    out["skipped_steps"] = skipped
    return out
