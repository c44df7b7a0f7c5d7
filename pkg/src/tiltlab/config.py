"""Configuration loading, validation, normalization and hashing.

One JSON file, sectioned per module. Every leaf is validated against the
schema below (type, constraint, unit); unknown keys are rejected with a
nearest-key suggestion. `--set section.key=value` overrides individual
leaves. The config hash is the sha256 of the canonical (sorted-key)
normalized tree, so key order never matters and any semantic change
changes the hash.
"""

import difflib
import hashlib
import json
import math

import numpy as np

from .baseline import BaselineGains
from .env import DisturbanceConfig, EnvConfig
from .losses import LossWeights
from .observation import noise_std_vector
from .params import RandomizationRanges, VehicleParams
from .ppo import PPOConfig
from .train import TrainConfig


class ConfigError(ValueError):
    pass


def _positive(v):
    return None if v > 0 else "must be > 0"


def _nonneg(v):
    return None if v >= 0 else "must be >= 0"


def _unit_interval_pair(v):
    lo, hi = v
    if lo < 0 or hi < lo:
        return "must satisfy 0 <= low <= high"
    return None


def _scale_pair(v):
    lo, hi = v
    if lo <= 0 or hi < lo:
        return "must satisfy 0 < low <= high"
    return None


def _limits_pair(v):
    lo, hi = v
    return None if lo < hi else "must satisfy low < high"


def _spin(v):
    return None if all(s in (-1, 1, -1.0, 1.0) for s in v) else "entries must be +1 or -1"


# leaf spec: (default, python type or (list, length), constraint fn, unit)
SCHEMA = {
    "vehicle": {
        "mass": (4.0, float, _positive, "kg"),
        "arm_radius": (0.3, float, _positive, "m"),
        "inertia_diag": ([0.08, 0.08, 0.14], (list, 3), lambda v: None if all(x > 0 for x in v) else "entries must be > 0", "kg*m^2"),
        "com_offset": ([0.0, 0.0, 0.0], (list, 3), None, "m"),
        "k_f": (1.2e-5, float, _positive, "N/(rad/s)^2"),
        "k_m": (1.5e-7, float, _positive, "N*m/(rad/s)^2"),
        "spin_directions": ([1, -1, 1, -1, 1, -1], (list, 6), _spin, "sign"),
        "tilt_omega_n": (20.0, float, _positive, "rad/s"),
        "tilt_zeta": (1.0, float, _positive, "-"),
        "prop_omega_n": (60.0, float, _positive, "rad/s"),
        "prop_zeta": (0.9, float, _positive, "-"),
        "prop_speed_limits": ([100.0, 1100.0], (list, 2), _unit_interval_pair, "rad/s"),
        "tilt_angle_limits": ([-math.pi, math.pi], (list, 2), _limits_pair, "rad"),
        "actuator_delay": (0.0, float, _nonneg, "s"),
        "rotor_radius": (0.1, float, _positive, "m"),
    },
    "randomization": {
        "mass_scale": ([1.0, 1.0], (list, 2), _scale_pair, "ratio"),
        "inertia_scale": ([1.0, 1.0], (list, 2), _scale_pair, "ratio"),
        "kf_scale": ([1.0, 1.0], (list, 2), _scale_pair, "ratio"),
        "tilt_omega_scale": ([1.0, 1.0], (list, 2), _scale_pair, "ratio"),
        "tilt_zeta_scale": ([1.0, 1.0], (list, 2), _scale_pair, "ratio"),
        "prop_omega_scale": ([1.0, 1.0], (list, 2), _scale_pair, "ratio"),
        "prop_zeta_scale": ([1.0, 1.0], (list, 2), _scale_pair, "ratio"),
        "delay_range": ([0.0, 0.0], (list, 2), _unit_interval_pair, "s"),
        "com_offset_radius": (0.0, float, _nonneg, "m"),
        "point_mass_range": ([0.0, 0.0], (list, 2), _unit_interval_pair, "kg"),
        "point_mass_offset": (0.1, float, _nonneg, "m"),
    },
    "disturbance": {
        "enabled": (False, bool, None, "-"),
        "force_range": (5.0, float, _nonneg, "N"),
        "torque_range": (1.0, float, _nonneg, "N*m"),
        "period": (3.0, float, _positive, "s"),
    },
    "controller": {
        "K_p": (12.0, float, _positive, "N/m"),
        "K_v": (16.0, float, _positive, "N/(m/s)"),
        "K_R": (6.0, float, _positive, "N*m/rad"),
        "K_w": (1.5, float, _positive, "N*m/(rad/s)"),
        "k_p": (2.0, float, _positive, "1/m scaled"),
        "k_R": (2.0, float, _positive, "1/rad scaled"),
    },
    "env": {
        "policy_dt": (0.01, float, _positive, "s"),
        "substeps": (10, int, lambda v: None if v >= 1 else "must be >= 1", "steps"),
        "episode_time_limit": (10.0, float, _nonneg, "s"),
        "pos_bound": (3.0, float, _positive, "m"),
        "init_pos_range": (0.5, float, _nonneg, "m"),
        "init_att_range_deg": (30.0, float, _nonneg, "deg"),
        "reference_height": (1.5, float, None, "m"),
        "ground_max_gain": (1.5, float, lambda v: None if v > 1 else "must be > 1", "ratio"),
    },
    "obs_noise": {
        "tilt": (0.0, float, _nonneg, "std"),
        "thrust": (0.0, float, _nonneg, "std"),
        "pose_err": (0.0, float, _nonneg, "std"),
        "vel_err": (0.0, float, _nonneg, "std"),
        "prev_vel_err": (0.0, float, _nonneg, "std"),
        "gravity": (0.0, float, _nonneg, "std"),
        "prev_action": (0.0, float, _nonneg, "std"),
    },
    "training": {
        "num_envs": (256, int, lambda v: None if v >= 1 else "must be >= 1", "envs"),
        "horizon": (64, int, lambda v: None if v >= 1 else "must be >= 1", "steps"),
        "minibatch": (4096, int, lambda v: None if v >= 1 else "must be >= 1", "samples"),
        "epochs": (5, int, lambda v: None if v >= 1 else "must be >= 1", "-"),
        "gamma": (0.99, float, lambda v: None if 0 < v <= 1 else "must be in (0, 1]", "-"),
        "lam": (0.95, float, lambda v: None if 0 <= v <= 1 else "must be in [0, 1]", "-"),
        "clip_eps": (0.2, float, _positive, "-"),
        "learning_rate": (3e-5, float, _positive, "1/step"),
        "total_steps": (2_000_000, int, _positive, "env steps"),
        "w_v": (1.0, float, _nonneg, "-"),
        "w_p": (0.1, float, _nonneg, "-"),
        "w_a": (0.05, float, _nonneg, "-"),
        "w_crash": (100.0, float, _nonneg, "-"),
        "entropy_coef": (0.0, float, _nonneg, "-"),
        "value_coef": (0.5, float, _nonneg, "-"),
        "max_grad_norm": (1.0, float, _nonneg, "-"),
        "checkpoint_every": (50, int, _nonneg, "updates"),
        "reference_samples": (12000, int, lambda v: None if v >= 10000 else "must be >= 10000", "samples"),
        "target_kl": (0.05, float, _nonneg, "nats"),
        "pretrain_steps": (800, int, _nonneg, "policy steps"),
        "pretrain_epochs": (20, int, _nonneg, "-"),
        "pretrain_lr": (1e-3, float, _positive, "1/step"),
        "pretrain_noise": (0.05, float, _nonneg, "std"),
        "warmup_updates": (6, int, _nonneg, "updates"),
        "sigma_init": (0.12, float, _positive, "std"),
    },
    "eval": {
        "duration": (10.0, float, _positive, "s"),
        "steady_start": (3.0, float, _nonneg, "s"),
    },
}


def default_config():
    return {
        section: {key: (list(spec[0]) if isinstance(spec[0], list) else spec[0])
                  for key, spec in leaves.items()}
        for section, leaves in SCHEMA.items()
    }


def _check_leaf(section, key, value, spec):
    default, typ, check, unit = spec
    path = f"{section}.{key}"
    if isinstance(typ, tuple):  # (list, length)
        if not isinstance(value, (list, tuple)) or len(value) != typ[1]:
            raise ConfigError(f"{path}: expected a list of {typ[1]} numbers [{unit}]")
        value = [float(v) for v in value]
    elif typ is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true/false")
    elif typ is int:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError(f"{path}: expected an integer [{unit}]")
        value = int(value)
    elif typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number [{unit}]")
        value = float(value)
        if not math.isfinite(value):
            raise ConfigError(f"{path}: must be finite [{unit}]")
    if check is not None:
        msg = check(value)
        if msg:
            raise ConfigError(f"{path}: {msg} [{unit}], got {value!r}")
    return value


def _suggest(key, options):
    close = difflib.get_close_matches(key, options, n=1)
    return f"; did you mean '{close[0]}'?" if close else ""


def parse_and_validate(source=None, overrides=()):
    """Config file path / dict / None -> normalized, fully-defaulted tree."""
    if source is None:
        raw = {}
    elif isinstance(source, dict):
        raw = source
    else:
        try:
            with open(source) as fh:
                raw = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {source}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{source}: invalid JSON: {exc}")
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")

    cfg = default_config()
    for section, leaves in raw.items():
        if section not in SCHEMA:
            raise ConfigError(
                f"unknown config section '{section}'{_suggest(section, SCHEMA)}"
            )
        if not isinstance(leaves, dict):
            raise ConfigError(f"section '{section}' must be an object")
        for key, value in leaves.items():
            if key not in SCHEMA[section]:
                raise ConfigError(
                    f"unknown key '{section}.{key}'{_suggest(key, SCHEMA[section])}"
                )
            cfg[section][key] = _check_leaf(section, key, value, SCHEMA[section][key])

    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        path, _, text = item.partition("=")
        parts = path.split(".")
        if len(parts) != 2 or parts[0] not in SCHEMA or parts[1] not in SCHEMA[parts[0]]:
            raise ConfigError(f"--set: unknown key '{path}'")
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        cfg[parts[0]][parts[1]] = _check_leaf(
            parts[0], parts[1], value, SCHEMA[parts[0]][parts[1]]
        )
    return cfg


def config_hash(cfg) -> str:
    return hashlib.sha256(
        json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()


# ------------------------------------------------------------- typed builders

def vehicle_params(cfg) -> VehicleParams:
    v = cfg["vehicle"]
    return VehicleParams(
        mass=v["mass"],
        inertia=np.diag(v["inertia_diag"]),
        com_offset=np.array(v["com_offset"]),
        arm_radius=v["arm_radius"],
        spin_directions=np.array(v["spin_directions"], dtype=float),
        k_f=v["k_f"],
        k_m=v["k_m"],
        tilt_omega_n=v["tilt_omega_n"],
        tilt_zeta=v["tilt_zeta"],
        prop_omega_n=v["prop_omega_n"],
        prop_zeta=v["prop_zeta"],
        prop_speed_limits=tuple(v["prop_speed_limits"]),
        tilt_angle_limits=tuple(v["tilt_angle_limits"]),
        actuator_delay=v["actuator_delay"],
        rotor_radius=v["rotor_radius"],
    ).validate()


def randomization_ranges(cfg) -> RandomizationRanges:
    r = cfg["randomization"]
    return RandomizationRanges(
        mass_scale=tuple(r["mass_scale"]),
        inertia_scale=tuple(r["inertia_scale"]),
        kf_scale=tuple(r["kf_scale"]),
        tilt_omega_scale=tuple(r["tilt_omega_scale"]),
        tilt_zeta_scale=tuple(r["tilt_zeta_scale"]),
        prop_omega_scale=tuple(r["prop_omega_scale"]),
        prop_zeta_scale=tuple(r["prop_zeta_scale"]),
        delay_range=tuple(r["delay_range"]),
        com_offset_radius=r["com_offset_radius"],
        point_mass_range=tuple(r["point_mass_range"]),
        point_mass_offset=r["point_mass_offset"],
    )


def baseline_gains(cfg) -> BaselineGains:
    c = cfg["controller"]
    return BaselineGains(
        K_p=c["K_p"], K_v=c["K_v"], K_R=c["K_R"], K_w=c["K_w"],
        k_p=c["k_p"], k_R=c["k_R"],
    )


def obs_noise_vector(cfg):
    stds = cfg["obs_noise"]
    if all(v == 0 for v in stds.values()):
        return None
    return noise_std_vector(stds)


def training_env_config(cfg) -> EnvConfig:
    e = cfg["env"]
    d = cfg["disturbance"]
    return EnvConfig(
        policy_dt=e["policy_dt"],
        substeps=e["substeps"],
        episode_time_limit=e["episode_time_limit"],
        pos_bound=e["pos_bound"],
        ground_plane=False,
        ground_max_gain=e["ground_max_gain"],
        reference_position=np.array([0.0, 0.0, e["reference_height"]]),
        init_pos_range=e["init_pos_range"],
        init_att_range=np.deg2rad(e["init_att_range_deg"]),
        randomization=randomization_ranges(cfg),
        disturbance=(
            DisturbanceConfig(d["force_range"], d["torque_range"], d["period"])
            if d["enabled"] else None
        ),
        obs_noise_std=obs_noise_vector(cfg),
        k_p=cfg["controller"]["k_p"],
        k_R=cfg["controller"]["k_R"],
        auto_reset=True,
    )


def train_config(cfg, seed: int) -> TrainConfig:
    t = cfg["training"]
    return TrainConfig(
        num_envs=t["num_envs"],
        horizon=t["horizon"],
        total_steps=t["total_steps"],
        seed=seed,
        weights=LossWeights(
            w_v=t["w_v"], w_p=t["w_p"], w_a=t["w_a"], w_crash=t["w_crash"]
        ),
        ppo=PPOConfig(
            clip_eps=t["clip_eps"],
            epochs=t["epochs"],
            minibatch=t["minibatch"],
            learning_rate=t["learning_rate"],
            gamma=t["gamma"],
            lam=t["lam"],
            value_coef=t["value_coef"],
            entropy_coef=t["entropy_coef"],
            max_grad_norm=t["max_grad_norm"],
            target_kl=t["target_kl"],
        ),
        checkpoint_every=t["checkpoint_every"],
        reference_samples=t["reference_samples"],
        pretrain_steps=t["pretrain_steps"],
        pretrain_epochs=t["pretrain_epochs"],
        pretrain_lr=t["pretrain_lr"],
        pretrain_noise=t["pretrain_noise"],
        warmup_updates=t["warmup_updates"],
        sigma_init=t["sigma_init"],
    ).validate()
