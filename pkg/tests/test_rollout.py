import numpy as np
import pytest

from tiltlab.env import DisturbanceConfig, EnvConfig, VecEnv
from tiltlab.losses import LossWeights, ReferenceGaussians
from tiltlab.network import PolicyNet
from tiltlab.rollout import RolloutBuffer, collect_rollouts, gae_advantages


def brute_force_gae(rewards, values, dones, last_values, gamma, lam):
    """Forward-sum oracle: A_t = sum_l (gamma lam)^l delta_{t+l} within episode."""
    t_steps, k = rewards.shape
    adv = np.zeros_like(rewards)
    for e in range(k):
        for t in range(t_steps):
            acc = 0.0
            coef = 1.0
            for l in range(t, t_steps):
                v_next = values[l + 1, e] if l + 1 < t_steps else last_values[e]
                nonterminal = 0.0 if dones[l, e] else 1.0
                delta = rewards[l, e] + gamma * v_next * nonterminal - values[l, e]
                acc += coef * delta
                if dones[l, e]:
                    break
                coef *= gamma * lam
            adv[t, e] = acc
            if dones[t, e]:
                continue
    return adv


def test_gae_gamma_zero():
    rng = np.random.default_rng(0)
    r = rng.normal(size=(5, 2))
    v = rng.normal(size=(5, 2))
    d = np.zeros((5, 2), dtype=bool)
    adv, ret = gae_advantages(r, v, d, np.zeros(2), gamma=0.0, lam=0.95)
    assert np.allclose(adv, r - v, atol=1e-12)
    assert np.allclose(ret, r, atol=1e-12)


def test_gae_lambda_zero_is_td_residual():
    rng = np.random.default_rng(1)
    r = rng.normal(size=(6, 3))
    v = rng.normal(size=(6, 3))
    last = rng.normal(size=3)
    d = np.zeros((6, 3), dtype=bool)
    adv, _ = gae_advantages(r, v, d, last, gamma=0.99, lam=0.0)
    v_next = np.vstack([v[1:], last[None, :]])
    assert np.allclose(adv, r + 0.99 * v_next - v, atol=1e-12)


def test_gae_matches_brute_force_with_dones():
    rng = np.random.default_rng(2)
    for _ in range(20):
        r = rng.normal(size=(10, 4))
        v = rng.normal(size=(10, 4))
        d = rng.random((10, 4)) < 0.2
        last = rng.normal(size=4)
        adv, ret = gae_advantages(r, v, d, last, gamma=0.97, lam=0.9)
        oracle = brute_force_gae(r, v, d, last, 0.97, 0.9)
        assert np.allclose(adv, oracle, atol=1e-10)
        assert np.allclose(ret, oracle + v, atol=1e-10)


@pytest.fixture
def small_env(nominal):
    cfg = EnvConfig(
        disturbance=DisturbanceConfig(force_range=1.0, torque_range=0.2),
        episode_time_limit=0.3,
    )
    return VecEnv(3, nominal, cfg, seed=5)


def _net():
    return PolicyNet(rng=np.random.Generator(np.random.PCG64(8)))


def test_collect_shapes(small_env):
    net = _net()
    rng = np.random.Generator(np.random.PCG64(1))
    buf = collect_rollouts(net, small_env, 40, rng, LossWeights(), None, gamma=0.99)
    assert buf.rewards.shape == (40, 3)
    assert buf.obs.shape == (40, 3, 51)
    assert buf.actions.shape == (40, 3, 12)
    assert buf.horizon == 40 and buf.num_envs == 3
    assert np.all(np.isfinite(buf.rewards))
    assert buf.dones.any()  # 0.3 s time limit forces episode turnover


def test_zero_weights_zero_rewards(nominal):
    env = VecEnv(2, nominal, EnvConfig(episode_time_limit=0.0), seed=3)
    net = _net()
    rng = np.random.Generator(np.random.PCG64(2))
    w = LossWeights(w_v=0.0, w_p=0.0, w_a=0.0, w_crash=0.0)
    buf = collect_rollouts(net, env, 20, rng, w, None, gamma=0.99)
    assert np.array_equal(buf.rewards, np.zeros((20, 2)))


def test_collect_deterministic(nominal):
    cfg = EnvConfig(disturbance=DisturbanceConfig(), episode_time_limit=0.5)
    w = LossWeights()
    ref = ReferenceGaussians(0.0, 0.05, 0.0, 0.1)
    results = []
    for _ in range(2):
        env = VecEnv(2, nominal, cfg, seed=11)
        net = PolicyNet(rng=np.random.Generator(np.random.PCG64(4)))
        rng = np.random.Generator(np.random.PCG64(5))
        results.append(collect_rollouts(net, env, 30, rng, w, ref, gamma=0.99))
    a, b = results
    for name in ("obs", "actions", "log_probs", "rewards", "values", "dones"):
        assert np.array_equal(getattr(a, name), getattr(b, name)), name
    assert a.loss_actuation == b.loss_actuation


def test_reward_decomposition(nominal):
    # logged reward equals -(w_v L_v + w_p L_p + w_a L_a) - crash, step by step
    cfg = EnvConfig(disturbance=DisturbanceConfig(), episode_time_limit=0.25)
    env = VecEnv(2, nominal, cfg, seed=21)
    net = _net()
    rng = np.random.Generator(np.random.PCG64(6))
    w = LossWeights(w_v=1.0, w_p=0.1, w_a=0.05, w_crash=50.0)
    ref = ReferenceGaussians(0.0, 0.05, 0.0, 0.1)
    buf = collect_rollouts(net, env, 50, rng, w, ref, gamma=0.99)
    reconstructed = -(
        w.w_v * buf.loss_vel + w.w_p * buf.loss_posture + w.w_a * buf.loss_actuation
    ) - buf.crash_penalty
    # truncation bootstraps add gamma V(s') on top of the decomposition
    trunc_mask = buf.dones & (buf.crash_penalty == 0.0)
    plain = ~trunc_mask
    assert np.allclose(buf.rewards[plain], reconstructed[plain], atol=1e-9)
    assert np.all(buf.rewards[trunc_mask] != reconstructed[trunc_mask])


def test_crash_penalty_applied(nominal):
    cfg = EnvConfig(episode_time_limit=0.0, pos_bound=0.05, init_pos_range=0.0,
                    init_att_range=0.0, disturbance=DisturbanceConfig(force_range=30.0))
    env = VecEnv(1, nominal, cfg, seed=2)
    net = _net()
    rng = np.random.Generator(np.random.PCG64(7))
    w = LossWeights(w_v=0.0, w_p=0.0, w_a=0.0, w_crash=50.0)
    buf = collect_rollouts(net, env, 200, rng, w, None, gamma=0.99)
    crashed = buf.crash_penalty > 0
    assert crashed.any()
    assert np.allclose(buf.rewards[crashed], -50.0)
