"""Versioned weight snapshots: save/load trained stacks bit-exactly.

A snapshot is a single .npz holding, per scale, the dense BVC -> PC weight
matrix, the adjacency tensor as sparse (k, i, j, value) triplets, and the
reward weights, plus the JSON-encoded simulation config and the source
environment text. Arrays round-trip bit-exactly through numpy; the config
uses repr-based float encoding so reloading reproduces identical values.
"""

from __future__ import annotations

import dataclasses
import hashlib
import io
import json
from pathlib import Path

import numpy as np

from .config import SimConfig, sim_config_from_dict
from .scales import ScaleStack, build_stacks
from .world import EnvironmentSpec, parse_environment

FORMAT_VERSION = 1


def save_snapshot(path: str | Path, stacks: list[ScaleStack], sim: SimConfig, env_text: str, env_name: str) -> None:
    """Write stacks + config + environment to a versioned npz file."""
    payload: dict[str, np.ndarray] = {
        "format_version": np.array([FORMAT_VERSION]),
        "n_scales": np.array([len(stacks)]),
        "config_json": _str_array(json.dumps(dataclasses.asdict(sim))),
        "env_text": _str_array(env_text),
        "env_name": _str_array(env_name),
    }
    for s, stack in enumerate(stacks):
        k, i, j, w = stack.adjacency.triplets()
        payload[f"s{s}_w_pb"] = stack.place.w_pb
        payload[f"s{s}_adj_k"] = k.astype(np.int32)
        payload[f"s{s}_adj_i"] = i.astype(np.int32)
        payload[f"s{s}_adj_j"] = j.astype(np.int32)
        payload[f"s{s}_adj_w"] = w
        payload[f"s{s}_w_r"] = stack.reward.weights
    with open(path, "wb") as fh:
        np.savez(fh, **payload)


def load_snapshot(path: str | Path) -> tuple[list[ScaleStack], SimConfig, EnvironmentSpec]:
    """Rebuild stacks (weights restored bit-exactly), config, and environment."""
    with np.load(path, allow_pickle=False) as data:
        version = int(data["format_version"][0])
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported snapshot version {version}")
        sim = sim_config_from_dict(json.loads(str(data["config_json"][0])))
        env = parse_environment(str(data["env_text"][0]), name=str(data["env_name"][0]))
        stacks = build_stacks(sim, env)
        if len(stacks) != int(data["n_scales"][0]):
            raise ValueError("snapshot scale count does not match its config")
        for s, stack in enumerate(stacks):
            stack.place.w_pb = data[f"s{s}_w_pb"].copy()
            stack.adjacency.w[:] = 0.0
            stack.adjacency.materialized[:] = False
            k = data[f"s{s}_adj_k"]
            i = data[f"s{s}_adj_i"]
            j = data[f"s{s}_adj_j"]
            stack.adjacency.w[k, i, j] = data[f"s{s}_adj_w"]
            stack.adjacency.materialized[k, i, j] = True
            stack.reward.weights = data[f"s{s}_w_r"].copy()
    return stacks, sim, env


def snapshot_hash(path: str | Path) -> str:
    """Digest of the snapshot's semantic content (stable across rewrites).

    Hashes the decompressed arrays rather than the file bytes, so two saves
    of identical state always agree even if zip metadata differs.
    """
    digest = hashlib.sha256()
    with np.load(path, allow_pickle=False) as data:
        for key in sorted(data.files):
            digest.update(key.encode())
            arr = data[key]
            digest.update(str(arr.dtype).encode())
            digest.update(np.ascontiguousarray(arr).tobytes())
    return digest.hexdigest()[:16]


def stacks_equal(a: list[ScaleStack], b: list[ScaleStack]) -> bool:
    """Bit-exact equality of all learned weights."""
    if len(a) != len(b):
        return False
    for sa, sb in zip(a, b):
        for wa, wb in zip(sa.weight_state(), sb.weight_state()):
            if wa.shape != wb.shape or not np.array_equal(wa, wb):
                return False
    return True


def _str_array(text: str) -> np.ndarray:
    return np.array([text])
