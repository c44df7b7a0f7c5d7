"""The three training loss terms and the reference command distributions.

Per step:   L_v = |v - v_ref| + |w - w_ref|        (Euclidean norms)
            L_p = sum_i |alpha_i - alpha_ref_i|     (six arms)
and per update batch an actuation penalty L_a: the KL divergence from the
baseline controller's fitted command Gaussians to the current policy's,
one term per action group (tilt rates, prop accelerations). The per-step
reward is the negated weighted sum; a terminal failure penalty guards
against early-termination reward hacking (zero weight recovers the pure
three-term form).
"""

from dataclasses import dataclass

import numpy as np

SIGMA_FLOOR = 1e-3


@dataclass
class LossWeights:
    w_v: float = 1.0  # velocity tracking
    w_p: float = 0.1  # posture distance from the optimal tilt reference
    w_a: float = 0.05  # actuation distribution matching (keep low)
    w_crash: float = 100.0  # one-time penalty on failure termination

    def validate(self):
        for name in ("w_v", "w_p", "w_a", "w_crash"):
            if getattr(self, name) < 0:
                raise ValueError(f"loss weight {name} must be >= 0")
        return self


@dataclass
class ReferenceGaussians:
    mu_tilt: float
    sigma_tilt: float
    mu_prop: float
    sigma_prop: float

    def validate(self):
        if self.sigma_tilt <= 0 or self.sigma_prop <= 0:
            raise ValueError("reference sigmas must be > 0 (floor applies at fit time)")
        return self


def step_losses(info, weights: LossWeights):
    """(L_v, L_p, reward_base) from one StepInfo batch; all shape (K,)."""
    l_v = info.loss_vel
    l_p = info.loss_posture
    return l_v, l_p, -(weights.w_v * l_v + weights.w_p * l_p)


def gaussian_kl(mu_a, sigma_a, mu_b, sigma_b):
    """Closed-form KL( N(mu_a, sigma_a^2) || N(mu_b, sigma_b^2) ) >= 0."""
    if sigma_a <= 0 or sigma_b <= 0:
        raise ValueError("gaussian_kl needs strictly positive sigmas")
    return (
        np.log(sigma_b / sigma_a)
        + (sigma_a**2 + (mu_a - mu_b) ** 2) / (2.0 * sigma_b**2)
        - 0.5
    )


def actuation_kl(ref: ReferenceGaussians, action_means, policy_std):
    """Batch actuation penalty: KL(ref || policy) per group, summed.

    The policy-side Gaussian pools each group: mean of the action means
    over the batch and the group's six dims, mean of the per-dim stds.
    """
    means = np.asarray(action_means)
    std = np.asarray(policy_std)
    mu_t = float(np.mean(means[..., :6]))
    mu_p = float(np.mean(means[..., 6:]))
    s_t = max(float(np.mean(std[:6])), SIGMA_FLOOR)
    s_p = max(float(np.mean(std[6:])), SIGMA_FLOOR)
    kl_t = gaussian_kl(ref.mu_tilt, ref.sigma_tilt, mu_t, s_t)
    kl_p = gaussian_kl(ref.mu_prop, ref.sigma_prop, mu_p, s_p)
    return kl_t + kl_p


def fit_reference_gaussians(actions, min_samples=10_000) -> ReferenceGaussians:
    """Fit the two command Gaussians from recorded normalized actions.

    `actions` is (N, 12) from baseline rollouts; tilt commands (first six
    columns) pool into one Gaussian, prop commands into the other. Sigmas
    are floored at 1e-3 so a constant command stream stays usable.
    """
    actions = np.asarray(actions, dtype=float).reshape(-1, 12)
    n = actions.shape[0] * 6
    if n < min_samples:
        raise ValueError(
            f"need at least {min_samples} command samples per group, got {n}"
        )
    tilt = actions[:, :6].ravel()
    prop = actions[:, 6:].ravel()
    return ReferenceGaussians(
        mu_tilt=float(np.mean(tilt)),
        sigma_tilt=max(float(np.std(tilt)), SIGMA_FLOOR),
        mu_prop=float(np.mean(prop)),
        sigma_prop=max(float(np.std(prop)), SIGMA_FLOOR),
    )
