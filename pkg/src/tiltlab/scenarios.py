"""Named evaluation scenarios and the wind disturbance model.

The catalog mirrors the three pose-regulation experiments (hover a few
centimeters above ground, free hover, hover at 60 deg roll), each with
and without a 0.5 kg mass bolted 10 cm from the nominal center of mass,
plus wind variants of the free-hover and roll60 poses. Hover heights and
wind magnitudes are stand-ins: the reference experiments do not pin them
numerically.

Scenario runs are deterministic in the seed; a small seed-driven initial
pose jitter (2 cm, 2 deg) makes multi-seed comparisons non-degenerate.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import quat

ROLL60 = quat.from_axis_angle(np.array([1.0, 0.0, 0.0]), np.deg2rad(60.0))


@dataclass
class WindConfig:
    mean_force: np.ndarray = field(default_factory=lambda: np.array([3.0, 0.0, 0.0]))
    gust_amplitude: float = 1.0  # N, sinusoidal along the mean direction
    gust_frequency: float = 0.5  # Hz
    per_propeller: bool = False  # fast-varying per-rotor streams (off by default)
    per_prop_amplitude: float = 0.5  # N per rotor
    per_prop_bandwidth: float = 20.0  # Hz, highest multisine component

    def __post_init__(self):
        self.mean_force = np.asarray(self.mean_force, dtype=float)


class WindModel:
    """Evaluates wind forces; all randomness fixed at construction."""

    N_TONES = 8

    def __init__(self, config: WindConfig, rng: np.random.Generator = None):
        self.config = config
        mean = config.mean_force
        norm = np.linalg.norm(mean)
        self.direction = mean / norm if norm > 0 else np.array([1.0, 0.0, 0.0])
        if config.per_propeller:
            if rng is None:
                rng = np.random.default_rng(0)
            self._phases = rng.uniform(0.0, 2.0 * np.pi, (6, self.N_TONES))
            self._freqs = np.linspace(
                config.per_prop_bandwidth / self.N_TONES,
                config.per_prop_bandwidth,
                self.N_TONES,
            )
        else:
            self._phases = None

    def world_force(self, t):
        """Mean + gust force (world frame) at times t, shape (K, 3)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        gust = self.config.gust_amplitude * np.sin(
            2.0 * np.pi * self.config.gust_frequency * t
        )
        return self.config.mean_force[None, :] + gust[:, None] * self.direction[None, :]

    def per_rotor(self, t):
        """Per-rotor force magnitudes (K, 6) along the wind direction, or None."""
        if self._phases is None:
            return None
        t = np.atleast_1d(np.asarray(t, dtype=float))
        arg = (
            2.0 * np.pi * self._freqs[None, None, :] * t[:, None, None]
            + self._phases[None, :, :]
        )
        return (
            self.config.per_prop_amplitude
            * np.sum(np.sin(arg), axis=-1)
            / np.sqrt(self.N_TONES)
        )


def wind_model(t, config: WindConfig, rng=None):
    """World-frame wind force at time(s) t for the given config."""
    return WindModel(config, rng).world_force(t)


@dataclass
class ScenarioConfig:
    name: str
    reference_position: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.5]))
    reference_attitude: np.ndarray = field(default_factory=lambda: quat.IDENTITY.copy())
    ground_plane: bool = False
    attached_mass: tuple | None = None  # (kg, body-frame offset)
    wind: WindConfig | None = None
    duration: float = 10.0  # s
    randomize: bool = False
    controller: str | None = None  # optional default: "baseline" or a checkpoint path

    def __post_init__(self):
        self.reference_position = np.asarray(self.reference_position, dtype=float)
        self.reference_attitude = np.asarray(self.reference_attitude, dtype=float)
        if self.duration <= 0:
            raise ValueError(f"scenario '{self.name}': duration must be > 0 s")


MASS_KG = 0.5
MASS_OFFSET = np.array([0.1, 0.0, 0.0])  # 10 cm out along arm 0


def scenario_catalog() -> dict:
    """The fixed scenario set, keyed by name."""
    base = {
        "ground-hover": ScenarioConfig(
            name="ground-hover",
            reference_position=np.array([0.0, 0.0, 0.05]),
            ground_plane=True,
        ),
        "free-hover": ScenarioConfig(name="free-hover"),
        "roll60": ScenarioConfig(name="roll60", reference_attitude=ROLL60.copy()),
    }
    out = {}
    for name, sc in base.items():
        out[name] = sc
        out[name + "+mass"] = replace(
            sc, name=name + "+mass", attached_mass=(MASS_KG, MASS_OFFSET.copy())
        )
    out["free-hover-wind"] = replace(
        base["free-hover"], name="free-hover-wind", wind=WindConfig()
    )
    out["roll60-wind"] = replace(base["roll60"], name="roll60-wind", wind=WindConfig())
    return out
