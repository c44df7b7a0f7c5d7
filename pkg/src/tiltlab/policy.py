"""Action sampling, clipping and scaling; the learned-controller wrapper."""

import numpy as np

from .actuator import PROP_ACCEL_MAX, TILT_RATE_MAX
from .network import PolicyNet, gaussian_log_prob


def sample_and_clip(mean, log_std, rng):
    """Draw a ~ N(mean, exp(log_std)^2), clip to [-1, 1].

    Returns (clipped action, raw pre-clip sample, log_prob of the raw
    sample). The raw sample is what PPO's likelihood ratio is computed on.
    """
    mean = np.asarray(mean)
    if not np.all(np.isfinite(log_std)):
        raise ValueError("log_std must be finite")
    noise = rng.standard_normal(mean.shape)
    raw = mean + np.exp(log_std) * noise
    logp = gaussian_log_prob(mean, log_std, raw)
    return np.clip(raw, -1.0, 1.0), raw, logp


def scale_action(action):
    """Normalized [-1, 1] action -> physical rates.

    Tilt entries scale to +/-6 rad/s; propeller entries to +/-10000 rpm/s
    (1047.1975511965977 rad/s^2).
    """
    action = np.asarray(action, dtype=float)
    out = np.empty_like(action)
    out[..., :6] = action[..., :6] * TILT_RATE_MAX
    out[..., 6:] = action[..., 6:] * PROP_ACCEL_MAX
    return out


class PolicyController:
    """Deterministic eval-time controller: action = clip(mean(obs))."""

    name = "policy"

    def __init__(self, net: PolicyNet):
        self.net = net

    def act(self, env) -> np.ndarray:
        obs = env.observe()
        mean, _ = self.net.forward(obs.astype(self.net.log_std.dtype))
        return np.clip(mean.astype(float), -1.0, 1.0)
