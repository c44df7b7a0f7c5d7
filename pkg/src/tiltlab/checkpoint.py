"""Versioned policy checkpoint files.

Layout: one UTF-8 JSON header line (magic, format version, array manifest
with names and shapes, seed, config hash, training metadata), a NUL
delimiter byte, then the raw little-endian float32 arrays concatenated in
manifest order. Save/load round-trips are bitwise exact because the
in-memory parameters are float32.
"""

import json
import os

import numpy as np

from .network import FORMAT_VERSION, HIDDEN, PolicyNet

MAGIC = "TILTLAB_POLICY"
_DELIM = b"\x00"


class CheckpointError(ValueError):
    pass


class CheckpointVersionError(CheckpointError):
    pass


class CheckpointShapeError(CheckpointError):
    pass


class CheckpointTruncatedError(CheckpointError):
    pass


def save_checkpoint(net: PolicyNet, path, seed=None, config_hash=None, extra=None):
    """Write `net` to `path`; returns the header dict."""
    names = net.param_names()
    params = net.params
    header = {
        "magic": MAGIC,
        "format_version": FORMAT_VERSION,
        "obs_dim": net.obs_dim,
        "act_dim": net.act_dim,
        "hidden": list(net.hidden),
        "dtype": "<f4",
        "arrays": [[n, list(p.shape)] for n, p in zip(names, params)],
        "seed": seed,
        "config_hash": config_hash,
        "extra": extra or {},
    }
    blob = json.dumps(header, sort_keys=True).encode() + b"\n" + _DELIM
    tmp = str(path) + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(blob)
        for p in params:
            fh.write(np.ascontiguousarray(p, dtype="<f4").tobytes())
    os.replace(tmp, path)
    return header


def read_header(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    cut = raw.find(_DELIM)
    if cut < 0:
        raise CheckpointTruncatedError(f"{path}: no header delimiter found")
    try:
        header = json.loads(raw[:cut].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: unreadable header: {exc}") from exc
    return header, raw[cut + 1:]


def load_checkpoint(path, obs_dim=51, act_dim=12) -> PolicyNet:
    """Reconstruct the policy; raises distinct errors for bad files."""
    header, payload = read_header(path)
    if header.get("magic") != MAGIC:
        raise CheckpointError(f"{path}: not a tiltlab checkpoint")
    if header.get("format_version") != FORMAT_VERSION:
        raise CheckpointVersionError(
            f"{path}: format version {header.get('format_version')} "
            f"(this build reads {FORMAT_VERSION})"
        )
    if header.get("obs_dim") != obs_dim:
        raise CheckpointShapeError(
            f"{path}: policy input layer expects {obs_dim} inputs, "
            f"checkpoint declares {header.get('obs_dim')}"
        )
    if header.get("act_dim") != act_dim:
        raise CheckpointShapeError(
            f"{path}: action head expects {act_dim} outputs, "
            f"checkpoint declares {header.get('act_dim')}"
        )
    hidden = tuple(header.get("hidden", HIDDEN))
    net = PolicyNet(obs_dim, act_dim, hidden, rng=None)
    names = net.param_names()
    params = net.params
    declared = header.get("arrays", [])
    if [n for n, _ in declared] != names:
        raise CheckpointShapeError(f"{path}: array manifest does not match layers {names}")
    offset = 0
    for (name, shape), p in zip(declared, params):
        if tuple(shape) != p.shape:
            raise CheckpointShapeError(
                f"{path}: layer {name} expects shape {p.shape}, checkpoint declares {tuple(shape)}"
            )
        nbytes = int(np.prod(shape)) * 4
        chunk = payload[offset:offset + nbytes]
        if len(chunk) < nbytes:
            raise CheckpointTruncatedError(
                f"{path}: truncated while reading {name} "
                f"({len(chunk)} of {nbytes} bytes present)"
            )
        p[...] = np.frombuffer(chunk, dtype="<f4").reshape(shape)
        offset += nbytes
    return net
