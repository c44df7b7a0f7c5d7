"""MLP policy/value networks with hand-rolled backprop.

Architecture: 51 -> 256 -> 128 -> 64 (ELU) -> 12 linear action means,
plus a state-independent learned log-std 12-vector, and a fully separate
value head 51 -> 256 -> 128 -> 64 -> 1.

Parameters live in float32 (matching the checkpoint wire format exactly);
all math is dtype-generic so tests can run float64 copies against central
finite differences.
"""

import numpy as np

HIDDEN = (256, 128, 64)
LOG_STD_INIT = float(np.log(0.5))
LOG_STD_MIN = float(np.log(0.01))
LOG_STD_MAX = float(np.log(1.0))
FORMAT_VERSION = 1


def elu(x):
    # clamp keeps expm1 off the discarded positive lanes (overflow-safe)
    return np.where(x > 0.0, x, np.expm1(np.minimum(x, 0.0)))


def elu_grad(x):
    return np.where(x > 0.0, 1.0, np.exp(np.minimum(x, 0.0)))


class MLP:
    """Plain fully-connected net, ELU hidden activations, linear output."""

    def __init__(self, in_dim, hidden, out_dim, rng=None, dtype=np.float32,
                 final_scale=1.0):
        self.sizes = [int(in_dim), *map(int, hidden), int(out_dim)]
        self.weights = []
        self.biases = []
        n_layers = len(self.sizes) - 1
        for li in range(n_layers):
            fan_in, fan_out = self.sizes[li], self.sizes[li + 1]
            if rng is None:
                w = np.zeros((fan_out, fan_in))
            else:
                w = rng.normal(0.0, np.sqrt(2.0 / fan_in), (fan_out, fan_in))
                if li == n_layers - 1:
                    w *= final_scale
            self.weights.append(np.asarray(w, dtype=dtype))
            self.biases.append(np.zeros(fan_out, dtype=dtype))

    @property
    def params(self):
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend([w, b])
        return out

    def forward(self, x, want_cache=False):
        """x: (B, in_dim) -> (B, out_dim). Cache holds pre-activations."""
        x = np.asarray(x)
        if x.shape[-1] != self.sizes[0]:
            raise ValueError(
                f"input has {x.shape[-1]} features, network expects {self.sizes[0]}"
            )
        pre = []
        acts = [x]
        h = x
        last = len(self.weights) - 1
        for li, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w.T + b
            if li < last:
                pre.append(z)
                h = elu(z)
                acts.append(h)
            else:
                h = z
        if want_cache:
            return h, (pre, acts)
        return h

    def backward(self, cache, dout):
        """Gradients of sum(dout * output) w.r.t. params and input."""
        pre, acts = cache
        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.biases)
        g = np.asarray(dout)
        for li in range(len(self.weights) - 1, -1, -1):
            grads_w[li] = g.T @ acts[li]
            grads_b[li] = g.sum(axis=0)
            g = g @ self.weights[li]
            if li > 0:
                # elu'(x) = 1 for x > 0, elu(x) + 1 otherwise: reuse the
                # cached activation instead of re-exponentiating
                g = g * np.where(pre[li - 1] > 0.0, 1.0, acts[li] + 1.0)
        out = []
        for w, b in zip(grads_w, grads_b):
            out.extend([w, b])
        return out, g

    def astype(self, dtype):
        clone = MLP(self.sizes[0], self.sizes[1:-1], self.sizes[-1], rng=None)
        clone.weights = [w.astype(dtype) for w in self.weights]
        clone.biases = [b.astype(dtype) for b in self.biases]
        return clone


class PolicyNet:
    """Gaussian policy + separate value function."""

    def __init__(self, obs_dim=51, act_dim=12, hidden=HIDDEN, rng=None,
                 dtype=np.float32, version=FORMAT_VERSION):
        self.obs_dim = int(obs_dim)
        self.act_dim = int(act_dim)
        self.hidden = tuple(int(h) for h in hidden)
        self.version = version
        self.pi = MLP(obs_dim, hidden, act_dim, rng, dtype, final_scale=0.01)
        self.log_std = np.full(act_dim, LOG_STD_INIT, dtype=dtype)
        self.vf = MLP(obs_dim, hidden, 1, rng, dtype, final_scale=1.0)

    @property
    def params(self):
        return self.pi.params + [self.log_std] + self.vf.params

    def param_names(self):
        names = []
        for li in range(len(self.pi.weights)):
            names.extend([f"pi.W{li}", f"pi.b{li}"])
        names.append("log_std")
        for li in range(len(self.vf.weights)):
            names.extend([f"vf.W{li}", f"vf.b{li}"])
        return names

    def forward(self, obs):
        """Deterministic pass: (B, 51) -> (action mean (B, 12), value (B,))."""
        obs = np.atleast_2d(np.asarray(obs))
        mean = self.pi.forward(obs)
        value = self.vf.forward(obs)[:, 0]
        return mean, value

    def clamp_log_std(self):
        np.clip(self.log_std, LOG_STD_MIN, LOG_STD_MAX, out=self.log_std)

    def astype(self, dtype):
        clone = PolicyNet(self.obs_dim, self.act_dim, self.hidden, rng=None,
                          dtype=dtype, version=self.version)
        clone.pi = self.pi.astype(dtype)
        clone.vf = self.vf.astype(dtype)
        clone.log_std = self.log_std.astype(dtype)
        return clone

    def copy(self):
        return self.astype(self.log_std.dtype)


LOG_2PI = float(np.log(2.0 * np.pi))


def gaussian_log_prob(mean, log_std, actions):
    """Diagonal-Gaussian log density of `actions`, summed over dims."""
    std = np.exp(log_std)
    z = (actions - mean) / std
    # python-float constants keep float32 inputs in float32 (NEP 50)
    return -0.5 * np.sum(z * z, axis=-1) - float(np.sum(log_std)) - 0.5 * mean.shape[-1] * LOG_2PI


def gaussian_entropy(log_std):
    """Entropy of the diagonal Gaussian (nats)."""
    return float(np.sum(log_std) + 0.5 * log_std.shape[-1] * (1.0 + np.log(2.0 * np.pi)))


class Adam:
    """Adam over a list of parameter arrays, updated in place."""

    def __init__(self, params, lr=3e-4, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p, dtype=np.float64) for p in params]
        self.v = [np.zeros_like(p, dtype=np.float64) for p in params]

    def step(self, params, grads):
        self.t += 1
        b1c = 1.0 - self.beta1**self.t
        b2c = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            g = np.asarray(g, dtype=np.float64)
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            update = self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)
            p -= update.astype(p.dtype)


def clip_grad_norm(grads, max_norm):
    """Scale the whole gradient list so its global L2 norm <= max_norm."""
    total = np.sqrt(sum(float(np.sum(np.asarray(g, dtype=np.float64) ** 2)) for g in grads))
    if max_norm and total > max_norm:
        scale = max_norm / (total + 1e-12)
        grads = [g * scale for g in grads]
    return grads, total
